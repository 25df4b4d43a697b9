use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("region is empty")]
    EmptyRegion,

    #[error("invalid parameter space: {0}")]
    InvalidSpace(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bracket [{a}, {b}] does not straddle a sign change (g(a) = {ga}, g(b) = {gb})")]
    InvalidBracket { a: f64, b: f64, ga: f64, gb: f64 },

    #[error("objective is -inf or NaN everywhere on the search domain")]
    NoFiniteValue,

    #[error("optimizer did not converge after {iterations} iterations (best value {best_value})")]
    NotConverged {
        iterations: usize,
        best_value: f64,
        best_point: Vec<f64>,
    },

    #[error("{failed} of {total} replications failed")]
    SimulationFailures { failed: usize, total: usize },
}

impl Error {
    /// Whether the error comes from bad user input (as opposed to a numeric failure).
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::UnknownParameter(_)
                | Error::EmptyRegion
                | Error::InvalidSpace(_)
                | Error::InvalidArgument(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
