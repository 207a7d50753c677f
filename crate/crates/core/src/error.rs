use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] io::Error),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("line {line}: invalid UTF-8")]
    Utf8 { line: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("cosine of a zero vector is undefined")]
    ZeroVector,

    #[error("cannot average an empty set of vectors")]
    EmptyInput,

    #[error("word `{0}` has no usable contexts")]
    NoContexts(String),

    #[error("word `{0}` has neither a surface form nor usable contexts")]
    Degenerate(String),

    #[error("missing embedding for `{0}`")]
    MissingEmbedding(String),

    #[error("not enough eligible words: need {needed}, found {found}")]
    NotEnoughWords { needed: usize, found: usize },

    #[error("plan does not match corpus: {0}")]
    PlanMismatch(String),

    #[error("empty training schedule")]
    EmptySchedule,

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid checkpoint: {0}")]
    Checkpoint(String),

    #[error("undefined statistic: {0}")]
    Undefined(String),

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("invalid argument: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn file(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
