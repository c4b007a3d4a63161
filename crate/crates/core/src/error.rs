use thiserror::Error;

/// Errors surfaced by the tracking library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("FAR normalization undefined for K + M = 0")]
    EmptyFactorGraph,

    #[error("invalid parameter {field}: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("measurement {index} has z_u = {z_u} at or below the detection threshold {threshold}")]
    BelowThreshold { index: usize, z_u: f64, threshold: f64 },

    #[error("singular Fisher information matrix")]
    SingularFim,

    #[error("association instance too large for enumeration ({legacy} legacy x {measurements} measurements, max {max})")]
    InstanceTooLarge {
        legacy: usize,
        measurements: usize,
        max: usize,
    },

    #[error("association instance has zero total weight")]
    DegenerateInstance,

    #[error("particle weights are all zero")]
    DegenerateWeights,

    #[error("step {step} outside scenario of {steps} steps")]
    StepOutOfRange { step: usize, steps: usize },

    #[error("scenario: {0}")]
    Scenario(String),

    #[error("aggregate: {0}")]
    Aggregate(String),

    #[error("io: {0}")]
    Io(String),

    #[error("format: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
