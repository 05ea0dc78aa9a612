use thiserror::Error;

/// Errors raised by the constitutive laws, the discrete solvers and the
/// simulation driver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate deformation: det F = {det:e} at {location}")]
    DegenerateDeformation { det: f64, location: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("chemical potential inversion failed for mu = {mu}: {reason}")]
    InversionFailure { mu: f64, reason: String },

    #[error("{solver} did not converge within {iterations} iterations (residual {residual:e})")]
    MaxIterationsExceeded {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("fixed-point iteration diverged after {iterations} iterations (residual {residual:e})")]
    FixedPointDiverged { iterations: usize, residual: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("configuration invalid: {}", .0.join("; "))]
    ConfigInvalid(Vec<String>),

    #[error("step {step}: {source}")]
    AtStep { step: usize, source: Box<Error> },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn degenerate(det: f64, location: impl Into<String>) -> Self {
        Error::DegenerateDeformation {
            det,
            location: location.into(),
        }
    }

    pub fn at_step(self, step: usize) -> Self {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }

    /// Strips any `AtStep` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            e => e,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
