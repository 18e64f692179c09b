use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no parsable Java source found")]
    CorpusEmpty,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("keyword configuration line {line}: {message}")]
    Keywords { line: usize, message: String },

    #[error("coverage file line {line}: {message}")]
    CoverageFormat { line: usize, message: String },

    #[error("test `{0}` has no coverage entry")]
    CoverageMissing(String),

    #[error("test `{0}` covers no items; redundancy is undefined")]
    CoverageUndefined(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("line {line}: {message}")]
    MalformedRow { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("label lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("requested {requested} items from a population of {available}")]
    SampleTooLarge { requested: usize, available: usize },

    #[error("feature matrix contains a non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("expected {expected} features, got {actual}")]
    Arity { expected: usize, actual: usize },

    #[error("balancing needs both classes present")]
    SingleClass,

    #[error("minority class has {minority} rows; {needed} are required for k = {k}")]
    MinorityTooSmall { minority: usize, needed: usize, k: usize },

    #[error("hyper-parameter search failed: every inner fold was skipped")]
    SearchExhausted,

    #[error("cross-project validation needs at least two projects, got {0}")]
    TooFewProjects(usize),

    #[error("model format version {found} is not supported (expected {expected})")]
    ModelVersion { found: u32, expected: u32 },

    #[error("all paired differences are zero")]
    DegenerateSample,

    #[error("project sets differ between compared reports: {0}")]
    ProjectMismatch(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
