use thiserror::Error;

/// Errors raised by the geometry routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid frequency vector: {0}")]
    InvalidLambda(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("map is not k-symmetric (max residual {residual:e})")]
    NotSymmetric { residual: f64 },
    #[error("map is singular (smallest singular value {sigma_min:e})")]
    Singular { sigma_min: f64 },
    #[error("degenerate metric: eigenvalue {eigenvalue:e} is numerically zero")]
    Degenerate { eigenvalue: f64 },
    #[error("invalid parameters for metric family `{family}`: {reason}")]
    InvalidFamily { family: String, reason: String },
    #[error("logarithm undefined: |t*lambda| = {value} >= 2*pi in block {block}")]
    LogDomain { block: usize, value: f64 },
    #[error("vector field returned a non-finite value at t = {t}")]
    NonFinite { t: f64 },
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error("invalid isometry data: {0}")]
    InvalidIsometry(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
