use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the domain of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A matrix that must be positive semi-definite has a clearly negative eigenvalue.
    #[error("operator is not positive semi-definite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    /// A quantity that the fixed-point maps divide by vanished.
    #[error("singular input: {0}")]
    SingularInput(String),

    /// A tensor product or lifted state would exceed the dimension cap.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// An iterative solver gave up without producing any usable point.
    #[error("solver did not converge for alpha = {alpha}, z = {z}: {detail}")]
    NonConvergence {
        alpha: f64,
        z: String,
        detail: String,
    },

    /// Malformed channel file.
    #[error("schema violation: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
