use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {what} at index {index}")]
    NonFiniteValue { what: &'static str, index: usize },

    #[error("energy or gradient became non-finite at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("trace is affine to working precision; the lifting ratio is undefined")]
    DegenerateTrace,

    #[error("linear solve stalled with relative residual {residual:e}")]
    NoConvergence { residual: f64 },

    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
