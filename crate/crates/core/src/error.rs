use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("program index {index} out of range (registry has {len} entries)")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("resource limit: {required} stages required but the budget is {limit}")]
    ResourceLimit { required: usize, limit: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("prefix of length {len} is too short for a shift by {shift}")]
    InsufficientPrefix { len: usize, shift: usize },

    #[error("digit {digit} at position {position} is out of range for base {base}")]
    DigitOutOfRange {
        position: usize,
        digit: String,
        base: String,
    },

    #[error("empty sample")]
    EmptySample,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
