use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("collective radiative rate is not positive ({0:e}); normalization is undefined")]
    NonPositiveRate(f64),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("step limit of {max_steps} reached at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("non-finite state encountered at t = {0}")]
    NonFinite(f64),

    #[error("fixed-point iteration diverged after {iterations} iterations (residual {residual:e})")]
    Divergence { iterations: usize, residual: f64 },

    #[error("eigensolver failed to converge for eigenvalue {0}")]
    Eigensolver(usize),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("state is not a converged steady state")]
    NotConverged,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
