use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the engine.
///
/// Variants fall into three families that the CLI maps onto exit codes:
/// input-format problems, configuration problems, and broken internal
/// invariants.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{source_name}:{line}: {message}")]
    Malformed {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("unknown node id {0}")]
    UnknownNode(u64),

    #[error("duplicate node id {id} at line {line}")]
    DuplicateNode { id: u64, line: usize },

    #[error("node ids are not dense: id {0} is missing")]
    SparseNodeIds(u64),

    #[error("unsupported format: {0}")]
    Version(String),

    #[error("truncated data: {0}")]
    Truncated(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("unknown relation {0:?}")]
    UnknownRelation(String),

    #[error("person cluster {cluster} has no ordinal in document {doc_id:?}")]
    MissingCluster { doc_id: String, cluster: i64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn malformed(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Malformed {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by bad input data rather than configuration or bugs.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Config(_) | Error::Invariant(_))
    }
}
