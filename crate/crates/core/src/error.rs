//! Crate-wide error type.

/// Convenience alias used by every fallible operation in the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A size guard was exceeded. The message names the guard and, where one
    /// exists, the fallback path the caller should use instead.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Operands of incompatible shape.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A quantity required by the formula is undefined for these inputs.
    #[error("undefined value: {0}")]
    Undefined(String),

    /// Fidelity is undefined for non-positive purities; carries the raw values.
    #[error("fidelity undefined: non-positive purity (purity_i = {purity_i}, purity_j = {purity_j})")]
    UndefinedFidelity { purity_i: f64, purity_j: f64 },

    /// Two datasets that must share a setting list do not.
    #[error("setting mismatch: {0}")]
    SettingMismatch(String),

    /// A dataset record violates a format invariant.
    #[error("dataset invariant violated at record {index}: {reason}")]
    InvariantViolation { index: usize, reason: String },

    /// Malformed input file or string.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
