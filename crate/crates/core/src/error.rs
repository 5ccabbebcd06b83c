use thiserror::Error;

/// Errors raised by state construction, transformations and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on dimensions, indices or normalization was violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// A file parsed as JSON but one of its fields holds an invalid value.
    #[error("invalid field `{field}`: {reason}")]
    Field { field: String, reason: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn field(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Field { field: field.into(), reason: reason.into() }
}
