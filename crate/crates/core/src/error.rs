use std::fmt;
use std::path::PathBuf;

/// Where in an input a format problem was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    /// Byte offset from the start of the file.
    Byte(usize),
    /// 1-based data row (header excluded) and 1-based column.
    Cell {
        row: usize,
        column: usize,
    },
    /// 1-based data row (header excluded).
    Row(usize),
    Unknown,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Byte(b) => write!(f, "byte {b}"),
            Location::Cell { row, column } => write!(f, "row {row}, column {column}"),
            Location::Row(r) => write!(f, "row {r}"),
            Location::Unknown => write!(f, "unknown location"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("matrix is rank deficient: Gram factorization failed at pivot {pivot}")]
    RankDeficient { pivot: usize },

    #[error("overflow in {context} at index {index}")]
    Overflow { context: &'static str, index: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("vectors are identical, no different attribute")]
    NoDifference,

    #[error("format error at {location}: {message}")]
    Format { location: Location, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn format(location: Location, message: impl Into<String>) -> Self {
        Error::Format {
            location,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
