use std::path::PathBuf;

/// Library-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("dataset '{0}' contains a single class")]
    SingleClass(String),

    #[error("no feature columns")]
    NoFeatureColumns,

    #[error("non-finite feature value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("could not split '{0}' with both classes in both halves (retry bound exceeded)")]
    SplitRetriesExhausted(String),

    #[error("budget {budget} exceeds pool size {pool}")]
    PoolExhausted { budget: usize, pool: usize },

    #[error("matrix factorization failed: {0}")]
    Factorization(&'static str),

    #[error("non-finite objective encountered during training")]
    NonFiniteObjective,

    #[error("unknown strategy id '{0}'")]
    UnknownStrategy(String),

    #[error("dataset '{0}' is not 2-dimensional")]
    NotTwoDimensional(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
