use thiserror::Error;

/// Every failure the library can report. Operations never silently truncate:
/// when precision runs out they return `PrecisionTooLow`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MnError {
    #[error("invalid prime {0}: expected an odd prime")]
    InvalidPrime(i64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("element is not invertible: {0}")]
    NotInvertible(String),
    #[error("precision too low: {0}")]
    PrecisionTooLow(String),
    #[error("coefficient requested at or above the truncation")]
    OutOfWindow,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("root lies outside F_(p^2): {0}")]
    RootOutsideField(String),
    #[error("level downshift from {from} to {to} is not supported")]
    LevelDownshift { from: u32, to: u32 },
    #[error("unknown identifier: {0}")]
    UnknownId(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, MnError>;
