use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("{file}: {message}")]
    Structure { file: String, message: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("facts store: {0}")]
    Facts(String),

    #[error("matrix: {0}")]
    Matrix(String),

    #[error("stale artifact `{artifact}`: {reason}")]
    StaleArtifact { artifact: String, reason: String },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("empty query after preprocessing")]
    EmptyQuery,

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
