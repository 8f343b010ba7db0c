use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),

    #[error("context length exceeded: {tokens} tokens > limit {limit}")]
    ContextLengthExceeded { tokens: usize, limit: usize },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("empty continuation")]
    EmptyContinuation,

    #[error("training corpus is empty")]
    EmptyCorpus,

    #[error("input too short: {tokens} tokens, need at least {required}")]
    TooShort { tokens: usize, required: usize },

    #[error("{field} out of range: {value} ({expected})")]
    OutOfDomain {
        field: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("vocabulary mismatch: {left} vs {right} entries")]
    VocabularyMismatch { left: usize, right: usize },

    #[error("token alignment mismatch: {0}")]
    Alignment(String),

    #[error("no records to aggregate")]
    EmptyRecords,

    #[error("invalid record {index}: {reason}")]
    InvalidRecord { index: usize, reason: String },

    #[error("missing gold class: {0}")]
    MissingClass(&'static str),

    #[error("schema violation in record {index}: {reason}")]
    Schema { index: usize, reason: String },

    #[error("malformed tagged input at line {line}: {reason}")]
    TagFormat { line: usize, reason: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("run aborted: {failed} of {total} records failed")]
    TooManyFailures { failed: usize, total: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

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

    /// Errors worth retrying against a remote backend.
    pub fn is_transient(&self) -> bool {
        matches!(self, Error::BackendUnavailable(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
