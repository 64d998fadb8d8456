use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the stance engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}, line {line}: {message}")]
    Malformed {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("unknown stance label {0:?}")]
    UnknownLabel(String),
    #[error("body id {body_id:?} (line {line}) has no matching body")]
    UnresolvedBody { body_id: String, line: u64 },
    #[error("duplicate (claim, body) pair at line {line}: body {body_id:?}")]
    DuplicatePair { body_id: String, line: u64 },
    #[error("instance {index} has no gold label")]
    Unlabeled { index: usize },
    #[error("{stage} dataset has a single class ({present}); both classes are required")]
    SingleClass { stage: String, present: String },
    #[error("class {class} has {count} instance(s); at least {required} required")]
    ClassTooSmall {
        class: String,
        count: usize,
        required: usize,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("schema mismatch: expected {expected}, found {found}")]
    SchemaMismatch { expected: String, found: String },
    #[error("embedding file: {0}")]
    Embedding(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("training aborted: {0}")]
    TrainingAborted(String),
    #[error("resource mismatch for {name}: manifest {expected}, found {found}")]
    ResourceMismatch {
        name: String,
        expected: String,
        found: String,
    },
    #[error("model format: {0}")]
    Format(String),
    #[error("keyword service: {0}")]
    Remote(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
