use std::io;

use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum DccaError {
    #[error("series length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("infeasible scale configuration: {0}")]
    InfeasibleScales(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("zero auto-fluctuation at scale {0}: profile is a polynomial in every window")]
    ZeroFluctuation(usize),

    #[error("rho outside [-1, 1] at scale {scale}: {value}")]
    RhoOutOfRange { scale: usize, value: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("tail sum did not converge within {cap} offsets")]
    NonConvergent { cap: usize },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eig:e}, trace {trace:e})")]
    NotPsd { min_eig: f64, trace: f64 },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("covariance table: {0}")]
    Table(String),

    #[error("covariance table version mismatch: expected {expected}, found {found}")]
    TableVersion { expected: String, found: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

impl DccaError {
    /// True for errors caused by a scale configuration that cannot work with the data.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, DccaError::InfeasibleScales(_))
    }
}

pub type Result<T> = std::result::Result<T, DccaError>;
