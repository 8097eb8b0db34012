//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while building or running a scenario.
#[derive(Debug, Error)]
pub enum Error {
    /// Operands have incompatible shapes (vector lengths, matrix sizes, block counts).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An argument is outside its admissible range (bad norm order, negative
    /// tolerance, non-finite entry, empty input).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A documented precondition does not hold (missing fixed-point witness,
    /// rank-deficient constraint matrix, non-positive transition product).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A graph schedule was asked for a step beyond its horizon.
    #[error("schedule exhausted: step {t} requested but horizon is {horizon}")]
    ScheduleExhausted { t: u64, horizon: u64 },

    /// A scenario file parsed as JSON but fails semantic validation.
    #[error("scenario schema: {0}")]
    Schema(String),

    /// An unrecognized check name was passed to the verification suite.
    #[error("unknown check: {0}")]
    UnknownCheck(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("scenario parse: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
