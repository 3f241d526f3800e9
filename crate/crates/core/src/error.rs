use thiserror::Error;

/// Errors raised by the model, geometry and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("coincident points: zero distance between {what}")]
    CoincidentPoints { what: String },

    #[error("enumeration budget exceeded: {required} subsets > cap {cap}; use the sampled checker")]
    BudgetExceeded { required: u128, cap: u128 },

    #[error("too many variables for brute force: {count} > {max}")]
    TooManyVariables { count: usize, max: usize },

    #[error("only {available} items with positive weight, cannot draw {requested}")]
    InsufficientMass { available: usize, requested: usize },

    #[error("value {value} outside the domain of {what}: {reason}")]
    OutOfDomain { what: &'static str, value: f64, reason: String },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
