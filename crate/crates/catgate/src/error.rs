//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {left} vs {right} in {context}")]
    DimensionMismatch {
        left: String,
        right: String,
        context: &'static str,
    },

    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("Fock truncation too small: {0}")]
    Truncation(String),

    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("step size too coarse: dt * max phase rate = {phase_per_step:.3} rad exceeds 0.3 rad")]
    StepSize { phase_per_step: f64 },

    #[error("positivity breach at t = {t_ns:.3} ns: min eigenvalue {min_eigenvalue:.3e}")]
    PositivityBreach { t_ns: f64, min_eigenvalue: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: usage/config problems are 1,
    /// numerical failures are 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::StepSize { .. }
            | Error::PositivityBreach { .. }
            | Error::Numerical(_)
            | Error::Truncation(_) => 2,
            _ => 1,
        }
    }
}
