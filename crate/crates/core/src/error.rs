use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: parse error: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: question `{id}`: {message}")]
    Validation {
        path: PathBuf,
        line: usize,
        id: String,
        message: String,
    },

    #[error("{path}: schema error: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("{path}: row {row}, column `{column}`: {message}")]
    Value {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("gold labels reference unknown question ids: {}", .0.join(", "))]
    Join(Vec<String>),

    #[error("evaluation error: {message}: {}", .ids.join(", "))]
    Coverage { message: String, ids: Vec<String> },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("llm gate error: {0}")]
    Gate(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
