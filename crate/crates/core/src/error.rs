use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid parameter or configuration value.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch: expected {expected} values, got {actual}")]
    Shape { expected: usize, actual: usize },

    /// Argument outside the domain where a formula is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A simulated path violated a feasibility constraint.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("fixed-point solver did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl fmt::Display) -> Self {
        Error::Config(msg.to_string())
    }

    pub(crate) fn domain(msg: impl fmt::Display) -> Self {
        Error::Domain(msg.to_string())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Shape { .. } | Error::Domain(_) => 2,
            Error::NonConvergence { .. } => 3,
            Error::Infeasible(_) => 4,
            Error::Io(_) => 1,
        }
    }
}
