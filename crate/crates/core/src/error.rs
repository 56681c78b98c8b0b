use thiserror::Error;

/// Errors raised by the cotranslation toolkit.
///
/// Check failures in the verification suites are not errors: they are
/// reported as failing rows of a [`crate::report::Report`]. Errors are
/// reserved for malformed input and constructions that cannot proceed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed word: {0}")]
    MalformedWord(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("point outside the truncation window: {0}")]
    OutOfWindow(String),

    #[error("singular or ill-conditioned transform: {0}")]
    Singular(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("generator map undefined at {0}")]
    IncompleteDefinition(String),

    #[error("rejected: {reason} (witness: {witness})")]
    Rejected { reason: String, witness: String },

    #[error("singular matrix at index {0}")]
    SingularAt(i64),

    #[error("horizon exceeded: |m| = {requested} > {horizon}")]
    Horizon { requested: u64, horizon: u64 },

    #[error("numeric overflow: {0}")]
    NumericOverflow(String),

    #[error("inconsistent partial cotranslation: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
