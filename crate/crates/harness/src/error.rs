use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("row {row}, column {column}: {message}")]
    Parse { row: usize, column: usize, message: String },

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("no records to summarize: {0}")]
    EmptyRecords(String),

    #[error(transparent)]
    Model(#[from] possal::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
