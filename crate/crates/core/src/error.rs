use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum SlrError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    /// Input violates a data-type invariant (non-finite entries, gaps in
    /// cluster numbering, rows that do not sum to one, ...).
    #[error("validation error: {0}")]
    Validation(String),

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid config: {0}")]
    Config(String),
}

impl SlrError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SlrError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        SlrError::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn check_len(what: &'static str, left: usize, right: usize) -> Result<()> {
        if left == right {
            Ok(())
        } else {
            Err(SlrError::LengthMismatch { what, left, right })
        }
    }
}

pub type Result<T> = std::result::Result<T, SlrError>;
