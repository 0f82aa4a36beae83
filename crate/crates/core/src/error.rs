//! Error types shared across the crate.

use thiserror::Error;

/// Argument outside a function's mathematical domain.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{context}: {message} (got {value})")]
pub struct DomainError {
    pub context: &'static str,
    pub message: &'static str,
    pub value: f64,
}

impl DomainError {
    pub fn new(context: &'static str, message: &'static str, value: f64) -> Self {
        Self { context, message, value }
    }
}

/// Errors from distribution parameter validation and moment queries.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    /// The second central moment of a Student-t only exists for nu > 2.
    #[error("{context}: second central moment undefined for nu = {nu} (requires nu > 2)")]
    UndefinedMoment { context: &'static str, nu: f64 },
}

/// Errors raised while assembling or evaluating losses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LossError {
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error("series length mismatch: truth has {truth} frames, estimate has {estimate}")]
    LengthMismatch { truth: usize, estimate: usize },
    #[error("series too short: need at least {min} frames, got {got}")]
    TooShort { min: usize, got: usize },
    #[error("ELBO requires at least one weight draw")]
    EmptyDraws,
    #[error("alpha must lie in [0, 1] (got {0})")]
    AlphaOutOfRange(f64),
}

/// Tensor shape disagreement in the autodiff graph.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{op}: {message}")]
pub struct ShapeError {
    pub op: &'static str,
    pub message: String,
}

impl ShapeError {
    pub fn new(op: &'static str, message: impl Into<String>) -> Self {
        Self { op, message: message.into() }
    }
}
