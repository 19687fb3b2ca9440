use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// Malformed file header or sample.
    #[error("parse error at byte {offset}: {msg}")]
    Parse { offset: usize, msg: String },

    /// The payload is shorter than the header promises.
    #[error("size mismatch: expected {expected} payload units, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: {0}")]
    Dimensions(String),

    #[error("disparity map has no valid pixel")]
    NoValidPixels,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::InvalidParam(msg.into())
}
