use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the respiration pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A data row could not be parsed. `row` counts data rows from 1 and
    /// excludes the header line.
    #[error("{message} at row {row}")]
    Parse { row: usize, message: String },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    /// A precondition on an operation's inputs does not hold.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("insufficient overlap: {available:.3} s available, {required:.3} s required")]
    InsufficientOverlap { available: f64, required: f64 },

    /// Zero-variance input where a correlation was requested.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("no valid windows")]
    NoValidWindows,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("image: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn parse(row: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            row,
            message: message.into(),
        }
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// True for errors caused by the content of input data rather than by
    /// the environment. A missing input file counts as a data error.
    pub fn is_data_error(&self) -> bool {
        match self {
            Error::File { source, .. } => source.is_data_error(),
            Error::Io(e) => matches!(
                e.kind(),
                std::io::ErrorKind::NotFound | std::io::ErrorKind::InvalidData | std::io::ErrorKind::UnexpectedEof
            ),
            Error::Image(_) => false,
            _ => true,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
