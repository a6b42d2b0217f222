use std::path::PathBuf;

/// Errors produced by the partitioning pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("triple has an empty subject or predicate: {0}")]
    EmptyTerm(String),

    #[error("mapped column `{column}` is not present in the CSV header")]
    MissingColumn { column: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("requested {requested} popular subjects but the store only has {distinct} distinct subjects")]
    NotEnoughSubjects { requested: usize, distinct: usize },

    #[error("fragment count must be at least 1")]
    ZeroFragments,

    #[error("master subject `{0}` is missing or repeated")]
    InvalidMaster(String),

    #[error("node count must be at least 1")]
    ZeroNodes,

    #[error("store is empty: no predicates to rank")]
    EmptyStore,

    #[error("top subjects have no triples to derive a threshold from")]
    NoTopSubjectTriples,

    #[error("threshold {0} is outside (0, 1]")]
    InvalidThreshold(f64),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
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

pub type Result<T, E = Error> = std::result::Result<T, E>;
