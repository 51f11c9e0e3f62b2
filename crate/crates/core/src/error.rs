use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: line {line}: {message}")]
    InputFormat {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("rule {index} ({concept}): {message}")]
    RuleCompile {
        index: usize,
        concept: String,
        message: String,
    },

    #[error("empty training corpus")]
    EmptyCorpus,

    #[error("prediction/gold key mismatch: missing from predictions {missing_in_predictions:?}, missing from gold {missing_in_gold:?}")]
    KeyMismatch {
        missing_in_predictions: Vec<String>,
        missing_in_gold: Vec<String>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
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
