//! Crate-wide error type.

use std::fmt;

/// Errors produced by the simulator core.
#[derive(Debug)]
pub enum SimError {
    /// An angle argument fell outside its documented domain.
    AngleOutOfRange { name: &'static str, value_deg: f64 },
    /// A satellite is geometrically below the local horizon.
    BelowHorizon { elevation_deg: f64 },
    /// A quantity that must be strictly positive was not.
    NonPositive { name: &'static str, value: f64 },
    /// A gNB id not present in the scenario.
    UnknownGnb { id: usize },
    /// A composite action index outside `[0, 9^L)`.
    ActionOutOfRange { index: usize, limit: usize },
    /// Vector length did not match a layer or state dimension.
    ShapeMismatch { expected: usize, got: usize },
    /// Replay memory holds fewer transitions than the requested batch.
    UnderfilledReplay { have: usize, need: usize },
    /// Scenario or training configuration failed validation.
    InvalidConfig(String),
    /// Checkpoint payload could not be used (version/shape problems).
    BadCheckpoint(String),
    /// Underlying I/O failure.
    Io(std::io::Error),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::AngleOutOfRange { name, value_deg } => {
                write!(f, "{name} = {value_deg}\u{b0} is outside the accepted range")
            }
            SimError::BelowHorizon { elevation_deg } => {
                write!(f, "satellite below horizon (elevation {elevation_deg}\u{b0})")
            }
            SimError::NonPositive { name, value } => {
                write!(f, "{name} must be positive, got {value}")
            }
            SimError::UnknownGnb { id } => write!(f, "unknown gNB id {id}"),
            SimError::ActionOutOfRange { index, limit } => {
                write!(f, "action index {index} out of range (limit {limit})")
            }
            SimError::ShapeMismatch { expected, got } => {
                write!(f, "shape mismatch: expected {expected}, got {got}")
            }
            SimError::UnderfilledReplay { have, need } => {
                write!(f, "replay holds {have} transitions, need {need}")
            }
            SimError::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            SimError::BadCheckpoint(msg) => write!(f, "bad checkpoint: {msg}"),
            SimError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for SimError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            SimError::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for SimError {
    fn from(e: std::io::Error) -> Self {
        SimError::Io(e)
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, SimError>;
