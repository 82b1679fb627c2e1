use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV at row {row}: {message}")]
    MalformedRow { row: usize, message: String },

    #[error("row {row} has {found} cells, expected {expected}")]
    Arity {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("column {column} ({name}) row {row}: cannot parse {value:?} as a number")]
    Unparseable {
        row: usize,
        column: usize,
        name: String,
        value: String,
    },

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("training diverged at epoch {epoch}: {what} is not finite")]
    Diverged { epoch: usize, what: &'static str },

    #[error("{0}")]
    Metric(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("repetition {repetition}{}{}: {source}",
        augmenter.as_ref().map(|a| format!(", augmenter {a}")).unwrap_or_default(),
        detector.as_ref().map(|d| format!(", detector {d}")).unwrap_or_default())]
    Experiment {
        repetition: usize,
        augmenter: Option<String>,
        detector: Option<String>,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
