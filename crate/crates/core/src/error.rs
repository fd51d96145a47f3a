use thiserror::Error;

/// Errors raised by the numeric, operator and certification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An argument is malformed (wrong length, negative entries, missing value).
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    /// The input admits no meaningful answer (e.g. zero matrix for a norm ratio).
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// An iterative search exhausted its budget.
    #[error("not converged: {0}")]
    NotConverged(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
