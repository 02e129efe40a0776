use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Stream(#[from] io::Error),

    /// Malformed input, located by source name and 1-based line number.
    #[error("{source_name}:{line}: {msg}")]
    Format {
        source_name: String,
        line: usize,
        msg: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("no records found for layer {0}")]
    EmptyResult(String),

    #[error("gold/prediction alignment mismatch: {0}")]
    Alignment(String),

    #[error("embedding provider protocol error: {0}")]
    Protocol(String),

    #[error("embedding provider failed: {0}")]
    Provider(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(source_name: &str, line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            source_name: source_name.to_owned(),
            line,
            msg: msg.into(),
        }
    }
}
