//! Bayes-by-Backprop variational layers.
//!
//! Every weight of the uncertainty head carries a Gaussian posterior
//! N(μ_w, σ_w²) with σ_w = ln(1 + exp(ρ_w)), so θ = (μ_w, ρ_w) trains by
//! plain backpropagation through the reparameterization w = μ_w + σ_w·ε.
//! Within one stochastic pass, weights are redrawn every `window_b` frames
//! and held constant inside the window; the deterministic point-prediction
//! path runs the head once with w = μ_w.

use crate::autodiff::{Tape, Tensor, Var};
use crate::distributions::GaussianParams;
use crate::error::DomainError;
use crate::seeding::rng_for;
use rand::Rng;
use rand_distr::StandardNormal;

const LN_TWO_PI: f64 = 1.837_877_066_409_345_6;

/// σ_w = ln(1 + exp(ρ_w)), strictly positive and monotone in ρ.
pub fn softplus_sigma(rho: f64) -> f64 {
    rho.max(0.0) + (-rho.abs()).exp().ln_1p()
}

/// Variational parameters of a single weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationalParam {
    pub mu_w: f64,
    pub rho_w: f64,
}

impl VariationalParam {
    pub fn sigma_w(&self) -> f64 {
        softplus_sigma(self.rho_w)
    }
}

/// How often weights are redrawn and how many stochastic passes are run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingSchedule {
    pub window_b: usize,
    pub n_passes: usize,
}

impl SamplingSchedule {
    pub fn new(window_b: usize, n_passes: usize) -> Result<Self, DomainError> {
        if window_b < 1 {
            return Err(DomainError::new("SamplingSchedule", "window_b must be >= 1", window_b as f64));
        }
        if n_passes < 1 {
            return Err(DomainError::new("SamplingSchedule", "n_passes must be >= 1", n_passes as f64));
        }
        Ok(Self { window_b, n_passes })
    }

    /// A Gaussian read of the predictive distribution needs roughly 30 draws.
    pub fn warns_low_passes(&self) -> bool {
        self.n_passes < 30
    }
}

/// Stored variational parameters of one dense BBB layer.
#[derive(Debug, Clone)]
pub struct BbbDense {
    pub weight_mu: Tensor,
    pub weight_rho: Tensor,
    pub bias_mu: Tensor,
    pub bias_rho: Tensor,
}

impl BbbDense {
    /// μ_w ~ U[−0.1, 0.1], ρ_w ~ U[−3, −2].
    pub fn init(rng: &mut impl Rng, inputs: usize, outputs: usize) -> Self {
        let mut uniform = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
            (0..n).map(|_| rng.gen_range(lo..hi)).collect()
        };
        Self {
            weight_mu: Tensor::from_vec(&[inputs, outputs], uniform(-0.1, 0.1, inputs * outputs)),
            weight_rho: Tensor::from_vec(&[inputs, outputs], uniform(-3.0, -2.0, inputs * outputs)),
            bias_mu: Tensor::from_vec(&[outputs], uniform(-0.1, 0.1, outputs)),
            bias_rho: Tensor::from_vec(&[outputs], uniform(-3.0, -2.0, outputs)),
        }
    }

    pub fn num_weights(&self) -> usize {
        self.weight_mu.len() + self.bias_mu.len()
    }
}

/// The BBB MLP head: dense variational layers, tanh on hidden, linear output.
#[derive(Debug, Clone)]
pub struct BbbStack {
    pub layers: Vec<BbbDense>,
    pub prior: GaussianParams,
}

impl BbbStack {
    /// `dims` lists layer widths input..=output, e.g. [32, 16, 8, 1].
    pub fn init(rng: &mut impl Rng, dims: &[usize], prior: GaussianParams) -> Self {
        assert!(dims.len() >= 2, "BBB stack needs at least one layer");
        let layers = dims.windows(2).map(|w| BbbDense::init(rng, w[0], w[1])).collect();
        Self { layers, prior }
    }

    pub fn num_weights(&self) -> usize {
        self.layers.iter().map(BbbDense::num_weights).sum()
    }

    /// Closed-form KL[q(w|θ) ‖ P(w)] summed over all weights.
    pub fn kl_to_prior(&self) -> f64 {
        let mut total = 0.0;
        for layer in &self.layers {
            for (mu, rho) in layer
                .weight_mu
                .data()
                .iter()
                .zip(layer.weight_rho.data())
                .chain(layer.bias_mu.data().iter().zip(layer.bias_rho.data()))
            {
                let q = GaussianParams::new(*mu, softplus_sigma(*rho)).expect("softplus > 0");
                total += crate::losses::kl_gaussian(&q, &self.prior);
            }
        }
        total
    }
}

/// A scalar-path weight draw from one layer with its log densities.
#[derive(Debug, Clone)]
pub struct WeightDraw {
    pub weight: Tensor,
    pub bias: Tensor,
    /// log q(w | θ) summed over the layer's weights.
    pub log_q: f64,
    /// log P(w) under the prior, summed over the layer's weights.
    pub log_prior: f64,
}

/// Reparameterized draw w = μ_w + σ_w·ε from one layer (no tape).
pub fn sample_weights(layer: &BbbDense, prior: &GaussianParams, rng: &mut impl Rng) -> WeightDraw {
    let mut log_q = 0.0;
    let mut log_prior = 0.0;
    let mut draw = |mu: &Tensor, rho: &Tensor| -> Tensor {
        let data: Vec<f64> = mu
            .data()
            .iter()
            .zip(rho.data())
            .map(|(&m, &r)| {
                let sigma = softplus_sigma(r);
                let eps: f64 = rng.sample(StandardNormal);
                let w = m + sigma * eps;
                log_q += -0.5 * LN_TWO_PI - sigma.ln() - 0.5 * eps * eps;
                let zp = (w - prior.mu) / prior.sigma;
                log_prior += -0.5 * LN_TWO_PI - prior.sigma.ln() - 0.5 * zp * zp;
                w
            })
            .collect();
        Tensor::from_vec(mu.shape(), data)
    };
    let weight = draw(&layer.weight_mu, &layer.weight_rho);
    let bias = draw(&layer.bias_mu, &layer.bias_rho);
    WeightDraw { weight, bias, log_q, log_prior }
}

/// Tape-side handles to one layer's variational parameters.
#[derive(Debug, Clone, Copy)]
pub struct BbbDenseVars {
    pub weight_mu: Var,
    pub weight_rho: Var,
    pub bias_mu: Var,
    pub bias_rho: Var,
}

/// Tape-side handles to the whole head.
#[derive(Debug, Clone)]
pub struct BbbStackVars {
    pub layers: Vec<BbbDenseVars>,
    pub prior: GaussianParams,
}

impl BbbStack {
    /// Insert all variational parameters as tape leaves.
    pub fn insert(&self, tape: &mut Tape) -> BbbStackVars {
        let layers = self
            .layers
            .iter()
            .map(|l| BbbDenseVars {
                weight_mu: tape.input(l.weight_mu.clone()),
                weight_rho: tape.input(l.weight_rho.clone()),
                bias_mu: tape.input(l.bias_mu.clone()),
                bias_rho: tape.input(l.bias_rho.clone()),
            })
            .collect();
        BbbStackVars { layers, prior: self.prior }
    }
}

/// One sampled layer on the tape: weight/bias nodes plus log-density nodes.
struct SampledLayerVars {
    weight: Var,
    bias: Var,
    log_q: Var,
    log_prior: Var,
}

/// log N(x | mu, sigma) summed over all elements, as graph nodes.
/// `z` must already be (x − mu)/sigma.
fn gaussian_logdensity_sum(tape: &mut Tape, z: Var, ln_sigma_sum: Var, count: usize) -> Var {
    let z2 = tape.square(z);
    let z2_sum = tape.sum_all(z2);
    let half_z2 = tape.mul_scalar(z2_sum, -0.5);
    let neg_ln_sigma = tape.neg(ln_sigma_sum);
    let partial = tape.add(half_z2, neg_ln_sigma);
    tape.add_scalar(partial, -0.5 * LN_TWO_PI * count as f64)
}

fn sample_layer_on_tape(
    tape: &mut Tape,
    layer: &BbbDenseVars,
    prior: &GaussianParams,
    rng: &mut impl Rng,
) -> SampledLayerVars {
    let mut parts: Vec<(Var, Var, Var)> = Vec::with_capacity(2); // (value, log_q, log_prior)
    for (mu, rho) in [(layer.weight_mu, layer.weight_rho), (layer.bias_mu, layer.bias_rho)] {
        let shape = tape.value(mu).shape().to_vec();
        let count = tape.value(mu).len();
        let eps: Vec<f64> = (0..count).map(|_| rng.sample(StandardNormal)).collect();
        let eps = tape.input(Tensor::from_vec(&shape, eps));
        let sigma = tape.softplus(rho);
        let noise = tape.mul(sigma, eps);
        let w = tape.add(mu, noise);

        // log q(w|θ): z = (w − μ)/σ, which the graph keeps differentiable
        // through both w and the variational parameters.
        let diff = tape.sub(w, mu);
        let zq = tape.div(diff, sigma);
        let ln_sigma = tape.ln(sigma);
        let ln_sigma_sum = tape.sum_all(ln_sigma);
        let log_q = gaussian_logdensity_sum(tape, zq, ln_sigma_sum, count);

        // log P(w) under the fixed prior.
        let shifted = tape.add_scalar(w, -prior.mu);
        let zp = tape.mul_scalar(shifted, 1.0 / prior.sigma);
        let ln_sigma_prior = tape.scalar_input(prior.sigma.ln() * count as f64);
        let log_prior = gaussian_logdensity_sum(tape, zp, ln_sigma_prior, count);

        parts.push((w, log_q, log_prior));
    }
    let log_q = tape.add(parts[0].1, parts[1].1);
    let log_prior = tape.add(parts[0].2, parts[1].2);
    SampledLayerVars { weight: parts[0].0, bias: parts[1].0, log_q, log_prior }
}

fn apply_stack(tape: &mut Tape, h: Var, layers: &[(Var, Var)]) -> Var {
    let mut x = h;
    for (idx, (w, b)) in layers.iter().enumerate() {
        x = tape.dense(x, *w, Some(*b)).expect("bbb head shapes");
        if idx + 1 < layers.len() {
            x = tape.tanh(x);
        }
    }
    x
}

/// One stochastic pass: output series plus its summed log q / log P nodes.
pub struct StochasticPass {
    /// `[B, T]` output of the head for this pass.
    pub output: Var,
    pub log_q: Var,
    pub log_prior: Var,
}

/// Deterministic pass with w = μ_w everywhere: `features [B,T,H]` → `[B,T]`.
pub fn forward_mean(tape: &mut Tape, stack: &BbbStackVars, features: Var) -> Var {
    let layers: Vec<(Var, Var)> =
        stack.layers.iter().map(|l| (l.weight_mu, l.bias_mu)).collect();
    let out = apply_stack(tape, features, &layers);
    let shape = tape.value(out).shape().to_vec();
    tape.reshape(out, &[shape[0], shape[1]])
}

/// `n_passes` stochastic passes over `features [B,T,H]`, resampling weights at
/// every multiple of `window_b` frames. All batch rows share each draw. The
/// per-pass RNG streams are split from `seed`, so pass order cannot leak
/// randomness between passes.
pub fn forward_stochastic(
    tape: &mut Tape,
    stack: &BbbStackVars,
    features: Var,
    schedule: &SamplingSchedule,
    seed: u64,
) -> Vec<StochasticPass> {
    let shape = tape.value(features).shape().to_vec();
    assert_eq!(shape.len(), 3, "forward_stochastic needs [B,T,H]");
    let (batch, frames, _) = (shape[0], shape[1], shape[2]);
    let mut passes = Vec::with_capacity(schedule.n_passes);
    for pass in 0..schedule.n_passes {
        let mut rng = rng_for(seed, &format!("bbb-pass-{pass}"));
        let mut window_outputs = Vec::new();
        let mut log_q: Option<Var> = None;
        let mut log_prior: Option<Var> = None;
        let mut t0 = 0;
        while t0 < frames {
            let t1 = (t0 + schedule.window_b).min(frames);
            let sampled: Vec<SampledLayerVars> = stack
                .layers
                .iter()
                .map(|l| sample_layer_on_tape(tape, l, &stack.prior, &mut rng))
                .collect();
            let window = tape.slice_time(features, t0, t1);
            let layer_vars: Vec<(Var, Var)> = sampled.iter().map(|s| (s.weight, s.bias)).collect();
            let out = apply_stack(tape, window, &layer_vars);
            window_outputs.push(out);
            for s in &sampled {
                log_q = Some(match log_q {
                    Some(acc) => tape.add(acc, s.log_q),
                    None => s.log_q,
                });
                log_prior = Some(match log_prior {
                    Some(acc) => tape.add(acc, s.log_prior),
                    None => s.log_prior,
                });
            }
            t0 = t1;
        }
        let full = tape.concat_time(&window_outputs);
        let output = tape.reshape(full, &[batch, frames]);
        passes.push(StochasticPass {
            output,
            log_q: log_q.expect("at least one window"),
            log_prior: log_prior.expect("at least one window"),
        });
    }
    passes
}

/// Per-frame mean and uncertainty aggregated from stochastic passes.
#[derive(Debug, Clone)]
pub struct PredictiveSeries {
    /// Point prediction from the mean-weight pass.
    pub m: Vec<f64>,
    /// Unbiased per-frame standard deviation across the stochastic passes.
    pub s: Vec<f64>,
}

/// Aggregate `n ≥ 2` stochastic output series and the mean-weight series into
/// a predictive series.
pub fn aggregate_predictive(
    mean_pass: &[f64],
    stochastic: &[Vec<f64>],
) -> Result<PredictiveSeries, DomainError> {
    if stochastic.len() < 2 {
        return Err(DomainError::new(
            "aggregate_predictive",
            "need at least 2 stochastic passes",
            stochastic.len() as f64,
        ));
    }
    let frames = mean_pass.len();
    for pass in stochastic {
        assert_eq!(pass.len(), frames, "stochastic pass length mismatch");
    }
    let n = stochastic.len() as f64;
    let mut s = Vec::with_capacity(frames);
    for t in 0..frames {
        let mean = stochastic.iter().map(|p| p[t]).sum::<f64>() / n;
        let ss = stochastic.iter().map(|p| (p[t] - mean).powi(2)).sum::<f64>();
        s.push((ss / (n - 1.0)).sqrt());
    }
    Ok(PredictiveSeries { m: mean_pass.to_vec(), s })
}
