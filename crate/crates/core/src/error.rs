//! Error types shared across the crate.

use std::fmt;

/// Errors produced by the spectral operators, the solver and the harness.
#[derive(Debug, Clone, PartialEq)]
pub enum DysonError {
    /// A field's length does not match the domain grid.
    LengthMismatch { expected: usize, actual: usize },
    /// Two fields live on different domains.
    DomainMismatch,
    /// An operation received a parameter outside its admissible range.
    InvalidParameter(String),
    /// A scenario or configuration file is inconsistent.
    Config(String),
    /// The solution developed negative values beyond the configured tolerance,
    /// which signals an under-resolved run.
    ResolutionFailure { time: f64, min_value: f64 },
    /// Non-finite values appeared in the solution.
    BlowUp { time: f64 },
    /// A characteristics root solve failed for some target points.
    CharacteristicsFailure { failed_points: usize },
    /// Filesystem / serialization problems in the harness.
    Io(String),
}

impl fmt::Display for DysonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DysonError::LengthMismatch { expected, actual } => {
                write!(
                    f,
                    "field length mismatch: expected {expected}, got {actual}"
                )
            }
            DysonError::DomainMismatch => write!(f, "fields live on different domains"),
            DysonError::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            DysonError::Config(msg) => write!(f, "configuration error: {msg}"),
            DysonError::ResolutionFailure { time, min_value } => write!(
                f,
                "resolution failure at t = {time}: min(u) = {min_value} below tolerance"
            ),
            DysonError::BlowUp { time } => write!(f, "non-finite values at t = {time}"),
            DysonError::CharacteristicsFailure { failed_points } => {
                write!(
                    f,
                    "characteristics solve failed at {failed_points} target points"
                )
            }
            DysonError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for DysonError {}

impl From<std::io::Error> for DysonError {
    fn from(e: std::io::Error) -> Self {
        DysonError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, DysonError>;
