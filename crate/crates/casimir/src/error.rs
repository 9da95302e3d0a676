//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CasimirError>;

#[derive(Debug, Error)]
pub enum CasimirError {
    /// Input outside an operation's domain (negative frequency, empty grid, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A screening length was requested for the wrong carrier statistics.
    #[error("wrong carrier statistics: {0}")]
    WrongStatistics(String),

    /// Scheme/material pairing rejected by the applicability gate.
    #[error("scheme not applicable: {0}")]
    SchemeNotApplicable(String),

    /// The Matsubara sum hit the index cap before meeting tolerance.
    #[error(
        "matsubara sum not converged within {max_index} terms \
         (remaining tail ~{tail:.3e} vs tolerance {tol:.3e} at value {value:.6e})"
    )]
    NonConvergence {
        max_index: usize,
        tail: f64,
        tol: f64,
        value: f64,
    },

    /// Malformed measurement or config file; carries the offending line.
    #[error("{path}:{line}: {message}")]
    Schema {
        path: String,
        line: usize,
        message: String,
    },

    /// Series and band evaluated on different separation grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CasimirError {
    pub fn domain(msg: impl Into<String>) -> Self {
        CasimirError::Domain(msg.into())
    }
}
