use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("alphabet mismatch: expected {expected}, found {found}")]
    AlphabetMismatch { expected: u32, found: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The request is well formed but exceeds an enumeration or memory guard.
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("measure is not invariant under the cube isometry group")]
    NotInvariant,

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn limit(msg: impl Into<String>) -> Self {
        Error::ResourceLimit(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }
}
