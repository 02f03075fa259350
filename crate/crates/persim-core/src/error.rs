//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("input contains no events")]
    EmptyInput,

    #[error("need at least 2 items to build a candidate index, got {n_items}")]
    TooFewItems { n_items: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("normal system is singular; use a regularization lambda > 0")]
    SingularSystem,

    #[error("user {user} has interacted with every item; no negative available")]
    NoNegativesAvailable { user: usize },

    #[error("no user has both a positive and a negative item; nothing to train on")]
    NoTrainableUsers,

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("query item {item} is not covered by the candidate index")]
    UnknownQueryItem { item: usize },

    #[error("ground-truth set is empty")]
    EmptyTruth,

    #[error("no evaluation queries")]
    NoQueries,

    #[error("invalid config: {0}")]
    ConfigInvalid(String),

    #[error("bad artifact: {0}")]
    BadArtifact(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
