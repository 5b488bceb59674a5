use thiserror::Error;

/// Errors raised by constructions and checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate operator: {0}")]
    Degenerate(String),

    #[error("input is not Hermitian (relative residual {0:.3e})")]
    NotHermitian(f64),

    /// A modular or embedding factor would overflow; carries the offending
    /// index pair and the log of the factor.
    #[error("ill-conditioned factor at index pair ({row}, {col}): log-factor {log_factor:.3}")]
    Conditioning {
        row: usize,
        col: usize,
        log_factor: f64,
    },

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("out of scope: {0}")]
    OutOfScope(String),

    #[error("quadrature: {0}")]
    Quadrature(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
