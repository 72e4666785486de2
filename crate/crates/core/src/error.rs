use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A malformed line or row in an input file. `line` is 1-based.
    #[error("{origin}:{line}: {message}")]
    Parse {
        origin: String,
        line: usize,
        message: String,
    },

    #[error("empty training corpus")]
    EmptyTrainingCorpus,

    #[error("no evaluation sets")]
    NoEvaluationSets,

    #[error("insufficient pairs")]
    InsufficientPairs,

    #[error("dimension mismatch: {expected} != {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("misaligned agreement vectors: {0}")]
    Misaligned(String),

    #[error("constant input: rank correlation is undefined")]
    ConstantInput,

    #[error("unknown tag set: {0}")]
    UnknownTagSet(String),

    #[error("unknown metric: {0}")]
    UnknownMetric(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing resource: {0}")]
    MissingResource(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(origin: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            origin: origin.into(),
            line,
            message: message.into(),
        }
    }
}
