use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count {requested} outside the supported range 1..={cap}")]
    Capacity { requested: usize, cap: usize },

    #[error("qubit index {index} out of range for a {num_qubits}-qubit state")]
    QubitIndex { index: usize, num_qubits: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("memory budget exceeded: {required} amplitudes requested, budget is {budget}")]
    MemoryBudget { required: usize, budget: usize },

    #[error("symmetric eigensolver did not converge")]
    EigenNonConvergence,

    #[error("factorization failed: non-positive pivot {pivot:e} at index {index}")]
    Factorization { index: usize, pivot: f64 },

    #[error("fixed-point solve did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("generalization error diverges: gamma = {gamma} >= 1")]
    Divergence { gamma: f64 },

    #[error("cumulative power undefined: all target weights are zero")]
    ZeroTargetPower,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("invalid binary gram file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::Dimension { expected, actual })
    }
}
