use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("value {value} outside solved range [0, {max}]")]
    OutOfRange { value: f64, max: f64 },

    #[error("extrinsic ball empty below r={min_t} (requested r={r})")]
    EmptyBall { r: f64, min_t: f64 },

    #[error("coverage violation: {0}")]
    Coverage(String),

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("gradient of the distance function undefined at t=0")]
    UndefinedGradient,

    #[error("eigensolver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    LinearSolver { iterations: usize, residual: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),
}

impl Error {
    /// Errors caused by the caller's configuration rather than by the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::OutOfRange { .. }
                | Error::EmptyBall { .. }
                | Error::Coverage(_)
                | Error::NotApplicable(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
