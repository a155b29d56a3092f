use thiserror::Error;

use crate::cumfn::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid cumulative function: {}", join(.0))]
    InvalidFunction(Vec<Violation>),

    #[error("{role} must be finite with zero initial value")]
    NotARateFunction { role: &'static str },

    #[error("alpha {0} outside [0, 1]")]
    AlphaOutOfDomain(f64),

    #[error("left limit is undefined at alpha = 0")]
    LeftLimitAtZero,

    #[error("block count k must be at least 1")]
    ZeroBlocks,

    #[error("shift c must be finite and non-negative, got {0}")]
    NegativeShift(f64),

    #[error("infinite minus infinite while evaluating {0}")]
    IndeterminateInfinity(&'static str),

    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("invalid distortion: {0}")]
    InvalidDistortion(String),

    #[error("distortion-rate function is unbounded (D(0) = inf)")]
    UnboundedDistortion,

    #[error("Blahut-Arimoto did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("unsupported closed form: {0}")]
    UnsupportedClosedForm(String),

    #[error("rate must be non-negative, got {0}")]
    NegativeRate(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("first profile does not majorize the second")]
    NotMajorizing,

    #[error("search space of {0} states exceeds the limit")]
    SearchTooLarge(u128),
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
