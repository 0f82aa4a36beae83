//! Training losses: concordance correlation, Gaussian and Student-t label KL
//! divergences, the stochastic ELBO, and the composite objective.
//!
//! Both KL losses are mean-seeking: the ground-truth distribution comes first,
//! `KL(truth ‖ estimate)`, so the estimate is pushed to cover the whole truth
//! rather than a single mode. For a t truth with ν degrees of freedom the
//! divergence against a Gaussian estimate N(m̂, ŝ²) is
//!
//! ```text
//! L_KL = ½·ln(2πŝ²) + (s²·ν/(ν−2) + (m−m̂)²) / (2ŝ²) − H(truth)
//! ```
//!
//! where s²·ν/(ν−2) is the truth's second central moment under the
//! scale-parameter convention and H its differential entropy. Minimizing over
//! ŝ lands on the scaled standard deviation s·√(ν/(ν−2)) — the relaxation the
//! Gaussian label KL does not have.

use crate::distributions::{GaussianParams, StudentTParams};
use crate::error::{DistributionError, LossError};

const LN_TWO_PI: f64 = 1.837_877_066_409_345_6;

/// Which family the fused ground-truth label distribution uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruthFamily {
    Gaussian,
    StudentT,
}

impl std::fmt::Display for TruthFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TruthFamily::Gaussian => write!(f, "gaussian"),
            TruthFamily::StudentT => write!(f, "student_t"),
        }
    }
}

/// A ground-truth series and its estimate, aligned frame by frame.
#[derive(Debug, Clone)]
pub struct SeriesPair<'a> {
    pub truth: &'a [f64],
    pub estimate: &'a [f64],
}

impl<'a> SeriesPair<'a> {
    pub fn new(truth: &'a [f64], estimate: &'a [f64]) -> Result<Self, LossError> {
        if truth.len() != estimate.len() {
            return Err(LossError::LengthMismatch { truth: truth.len(), estimate: estimate.len() });
        }
        if truth.len() < 2 {
            return Err(LossError::TooShort { min: 2, got: truth.len() });
        }
        Ok(Self { truth, estimate })
    }
}

/// Per-frame ground-truth distribution (either family) with a Gaussian estimate.
#[derive(Debug, Clone, Copy)]
pub enum TruthDist {
    Gaussian(GaussianParams),
    StudentT(StudentTParams),
}

/// One frame of truth distribution paired with its Gaussian estimate.
#[derive(Debug, Clone, Copy)]
pub struct FrameDistPair {
    pub truth: TruthDist,
    pub estimate: GaussianParams,
}

/// Configuration of the composite training objective.
#[derive(Debug, Clone, Copy)]
pub struct CompositeLossConfig {
    pub alpha: f64,
    pub truth_family: TruthFamily,
}

impl CompositeLossConfig {
    pub fn new(alpha: f64, truth_family: TruthFamily) -> Result<Self, LossError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(LossError::AlphaOutOfRange(alpha));
        }
        Ok(Self { alpha, truth_family })
    }
}

fn is_constant(xs: &[f64]) -> bool {
    xs.iter().all(|&x| x == xs[0])
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Concordance correlation coefficient with population (1/T) moments:
///
/// ```text
/// CCC = 2·cov(m, m̂) / (σ_m² + σ_m̂² + (μ_m − μ_m̂)²)
/// ```
///
/// Degenerate inputs are pinned instead of producing NaN: two identical
/// constant series agree perfectly (1.0) and a single constant series carries
/// no co-variation (0.0).
pub fn ccc(pair: &SeriesPair) -> f64 {
    let t_const = is_constant(pair.truth);
    let e_const = is_constant(pair.estimate);
    if t_const && e_const {
        return if pair.truth[0] == pair.estimate[0] { 1.0 } else { 0.0 };
    }
    if t_const || e_const {
        return 0.0;
    }
    let n = pair.truth.len() as f64;
    let mu_t = mean(pair.truth);
    let mu_e = mean(pair.estimate);
    let mut var_t = 0.0;
    let mut var_e = 0.0;
    let mut cov = 0.0;
    for (&a, &b) in pair.truth.iter().zip(pair.estimate.iter()) {
        let da = a - mu_t;
        let db = b - mu_e;
        var_t += da * da;
        var_e += db * db;
        cov += da * db;
    }
    var_t /= n;
    var_e /= n;
    cov /= n;
    let bias = mu_t - mu_e;
    2.0 * cov / (var_t + var_e + bias * bias)
}

/// KL divergence between two Gaussians, truth first:
/// ln(ŝ/s) + (s² + (m−m̂)²)/(2ŝ²) − ½.
pub fn kl_gaussian(truth: &GaussianParams, estimate: &GaussianParams) -> f64 {
    let dm = truth.mu - estimate.mu;
    (estimate.sigma / truth.sigma).ln()
        + (truth.sigma * truth.sigma + dm * dm) / (2.0 * estimate.sigma * estimate.sigma)
        - 0.5
}

/// KL divergence of a Student-t truth from a Gaussian estimate, truth first.
///
/// Requires ν > 2 (the truth's second moment must exist); smaller ν is a hard
/// error rather than a clamp so degenerate annotation counts surface early.
pub fn kl_t(truth: &StudentTParams, estimate: &GaussianParams) -> Result<f64, DistributionError> {
    let second_moment = truth.variance()?;
    let dm = truth.mu - estimate.mu;
    let s_hat2 = estimate.sigma * estimate.sigma;
    Ok(0.5 * (LN_TWO_PI + s_hat2.ln()) + (second_moment + dm * dm) / (2.0 * s_hat2)
        - truth.entropy())
}

/// Per-frame label KL under the frame's truth family.
pub fn kl_frame(frame: &FrameDistPair) -> Result<f64, LossError> {
    match &frame.truth {
        TruthDist::Gaussian(g) => Ok(kl_gaussian(g, &frame.estimate)),
        TruthDist::StudentT(t) => Ok(kl_t(t, &frame.estimate)?),
    }
}

/// One stochastic forward pass's contribution to the ELBO estimate.
#[derive(Debug, Clone, Copy)]
pub struct ElboDraw {
    /// log q(w⁽ⁱ⁾ | θ) summed over the drawn weights.
    pub log_q: f64,
    /// log P(w⁽ⁱ⁾) under the prior, summed over the drawn weights.
    pub log_prior: f64,
    /// log P(D | w⁽ⁱ⁾), the data log-likelihood for this draw.
    pub log_lik: f64,
}

/// Stochastic ELBO over `n` weight draws:
/// Σᵢ log q(w⁽ⁱ⁾|θ) − log P(w⁽ⁱ⁾) − log P(D|w⁽ⁱ⁾).
pub fn elbo_bbb(draws: &[ElboDraw]) -> Result<f64, LossError> {
    if draws.is_empty() {
        return Err(LossError::EmptyDraws);
    }
    Ok(draws.iter().map(|d| d.log_q - d.log_prior - d.log_lik).sum())
}

/// Composite objective (1 − CCC(m)) + ELBO + α·KL_label.
pub fn composite_loss(ccc_m: f64, elbo: f64, kl_label: f64, cfg: &CompositeLossConfig) -> f64 {
    (1.0 - ccc_m) + elbo + cfg.alpha * kl_label
}
