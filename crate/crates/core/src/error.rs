use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A base table is not materialized far enough for the requested value.
    #[error("value {value} exceeds the materialized range of base `{base}` (largest term {largest})")]
    Range {
        base: String,
        value: String,
        largest: String,
    },

    #[error("signature violation at index {index}: {reason}")]
    Signature { index: usize, reason: String },

    /// An enclosure could not decide a comparison at the available precision.
    #[error("indeterminate: {0}")]
    Indeterminate(String),

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("hypothesis check failed: {0}")]
    Hypothesis(String),

    #[error("undecided: {0}")]
    Undecided(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
