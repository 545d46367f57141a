use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Shapes disagree or a value is outside its domain (NaN, out-of-range index).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configuration violates one of its invariants.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// The configuration is valid but the requested quantity degenerates.
    #[error("degenerate config: {0}")]
    DegenerateConfig(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    /// Malformed file contents. `offset` is the byte position where parsing failed.
    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub(crate) fn format(offset: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }
}
