//! Error type shared by the simulation, control, and training layers.

use thiserror::Error;

/// Unified error for the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or configuration value violates its documented constraint.
    #[error("invalid {name}: {message} (got {value})")]
    InvalidParameter {
        name: &'static str,
        message: &'static str,
        value: f64,
    },

    /// A state or signal became non-finite during integration. `time` is the
    /// last instant at which the state was still valid.
    #[error("non-finite {what} at t = {time} s")]
    NonFinite { what: &'static str, time: f64 },

    /// Vector or matrix sizes do not line up.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// An operation that needs data received none.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// A computed value that must be finite was NaN or infinite.
    #[error("non-finite {0}")]
    NonFiniteValue(&'static str),

    /// Training cost became non-finite at the given epoch.
    #[error("training diverged at epoch {epoch}")]
    TrainingDiverged { epoch: usize },

    /// A scenario definition is internally inconsistent.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// Malformed dataset, model, or configuration content.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Convenience constructor for parameter validation.
    pub fn invalid(name: &'static str, message: &'static str, value: f64) -> Self {
        Error::InvalidParameter {
            name,
            message,
            value,
        }
    }
}
