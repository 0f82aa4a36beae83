//! Location-scale Gaussian and Student-t distributions.
//!
//! The Student-t here is the three-parameter location-scale family
//!
//! ```text
//! p(y | ν, μ, σ) = 1/B(1/2, ν/2) · 1/√(νσ²) · (1 + (y−μ)²/(νσ²))^(−(ν+1)/2)
//! ```
//!
//! where σ is the *scale*, not the standard deviation. For ν > 2 the standard
//! deviation is the scaled form σ·√(ν/(ν−2)) ([`StudentTParams::scaled_std`]),
//! which grows as the degrees of freedom shrink. Fused annotation spreads are
//! plugged in as this scale parameter.

use crate::error::{DistributionError, DomainError};
use crate::special::{digamma, log_beta};

const LN_TWO_PI: f64 = 1.837_877_066_409_345_6;

/// Parameters of a univariate Gaussian with strictly positive σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub mu: f64,
    pub sigma: f64,
}

impl GaussianParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self, DistributionError> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(DomainError::new("GaussianParams", "sigma must be finite and > 0", sigma).into());
        }
        if !mu.is_finite() {
            return Err(DomainError::new("GaussianParams", "mu must be finite", mu).into());
        }
        Ok(Self { mu, sigma })
    }

    /// Log of the Gaussian density at `y`.
    pub fn logpdf(&self, y: f64) -> f64 {
        let z = (y - self.mu) / self.sigma;
        -0.5 * LN_TWO_PI - self.sigma.ln() - 0.5 * z * z
    }

    /// Differential entropy ½·ln(2πeσ²).
    pub fn entropy(&self) -> f64 {
        0.5 * (LN_TWO_PI + 1.0) + self.sigma.ln()
    }
}

/// Parameters of a location-scale Student-t with ν > 0 and scale σ > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudentTParams {
    pub nu: f64,
    pub mu: f64,
    pub sigma: f64,
}

impl StudentTParams {
    pub fn new(nu: f64, mu: f64, sigma: f64) -> Result<Self, DistributionError> {
        if !nu.is_finite() || nu <= 0.0 {
            return Err(DomainError::new("StudentTParams", "nu must be finite and > 0", nu).into());
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(DomainError::new("StudentTParams", "sigma must be finite and > 0", sigma).into());
        }
        if !mu.is_finite() {
            return Err(DomainError::new("StudentTParams", "mu must be finite", mu).into());
        }
        Ok(Self { nu, mu, sigma })
    }

    /// Log of the t density at `y`, evaluated through [`log_beta`].
    pub fn logpdf(&self, y: f64) -> f64 {
        let lb = log_beta(0.5, 0.5 * self.nu).expect("nu validated at construction");
        let z = (y - self.mu) / self.sigma;
        -lb - 0.5 * (self.nu * self.sigma * self.sigma).ln()
            - 0.5 * (self.nu + 1.0) * (z * z / self.nu).ln_1p()
    }

    /// Differential entropy of the location-scale t:
    ///
    /// ```text
    /// H = ln(σ·√ν·B(1/2, ν/2)) + (ν+1)/2 · (ψ((ν+1)/2) − ψ(ν/2))
    /// ```
    pub fn entropy(&self) -> f64 {
        let nu = self.nu;
        let lb = log_beta(0.5, 0.5 * nu).expect("nu validated at construction");
        let psi_term = digamma(0.5 * (nu + 1.0)).expect("nu > 0")
            - digamma(0.5 * nu).expect("nu > 0");
        self.sigma.ln() + 0.5 * nu.ln() + lb + 0.5 * (nu + 1.0) * psi_term
    }

    /// Standard deviation σ·√(ν/(ν−2)); only defined for ν > 2.
    pub fn scaled_std(&self) -> Result<f64, DistributionError> {
        if self.nu <= 2.0 {
            return Err(DistributionError::UndefinedMoment { context: "scaled_std", nu: self.nu });
        }
        Ok(self.sigma * (self.nu / (self.nu - 2.0)).sqrt())
    }

    /// Second central moment σ²·ν/(ν−2); only defined for ν > 2.
    pub fn variance(&self) -> Result<f64, DistributionError> {
        if self.nu <= 2.0 {
            return Err(DistributionError::UndefinedMoment { context: "variance", nu: self.nu });
        }
        Ok(self.sigma * self.sigma * self.nu / (self.nu - 2.0))
    }
}

/// Log of the Gaussian density of `p` at `y`.
pub fn gaussian_logpdf(p: &GaussianParams, y: f64) -> f64 {
    p.logpdf(y)
}

/// Log of the Student-t density of `p` at `y`.
pub fn studentt_logpdf(p: &StudentTParams, y: f64) -> f64 {
    p.logpdf(y)
}

/// Differential entropy of the Student-t `p`.
pub fn studentt_entropy(p: &StudentTParams) -> f64 {
    p.entropy()
}

/// Scaled standard deviation of the Student-t `p` (Err for ν ≤ 2).
pub fn scaled_std(p: &StudentTParams) -> Result<f64, DistributionError> {
    p.scaled_std()
}
