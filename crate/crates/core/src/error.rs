use thiserror::Error;

/// Errors raised by the lab's computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("matrix is numerically singular: {0}")]
    Singular(String),

    #[error("capacity exceeded: {needed} terms requested, cap is {cap}")]
    Capacity { needed: usize, cap: usize },

    #[error("sample budget too small: {0}")]
    Budget(String),

    #[error("state is not U(n)-invariant (max residual {0:e})")]
    NotInvariant(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
