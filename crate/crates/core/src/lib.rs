//! Subjectivity-aware label-uncertainty modeling for time-continuous
//! multi-annotator ratings.
//!
//! The crate fuses per-frame ratings from several annotators into ground-truth
//! label distributions (Gaussian or Student-t with ν equal to the annotator
//! count), trains a small Bayes-by-Backprop network end to end with a
//! composite CCC + ELBO + label-KL loss, and evaluates mean and uncertainty
//! estimates with CCC and KL metrics. A seeded synthetic-data generator with
//! known ground truth makes the whole pipeline verifiable at desk scale.
//!
//! Module map:
//! - [`special`], [`distributions`]: log-gamma/digamma/log-beta, Gaussian and
//!   location-scale Student-t densities, entropy and moment scaling.
//! - [`losses`]: CCC, Gaussian and t label KL divergences, ELBO, composite loss.
//! - [`autodiff`]: tape-based reverse-mode AD with the operators the network needs.
//! - [`bnn`]: variational weight distributions, reparameterized sampling on the
//!   window schedule, deterministic mean-weight prediction.
//! - [`annotations`]: ingestion, fusion (mean/std/EWE), filtering, annotator ablation.
//! - [`synth`]: seeded synthetic sequences with known (m_t, s_t).
//! - [`pipeline`]: training, evaluation, post-processing, sweeps, CSV artifacts.

pub mod annotations;
pub mod autodiff;
pub mod bnn;
pub mod distributions;
pub mod error;
pub mod losses;
pub mod pipeline;
pub mod seeding;
pub mod special;
pub mod synth;

pub use distributions::{GaussianParams, StudentTParams};
pub use losses::TruthFamily;
