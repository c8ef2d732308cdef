//! Crate-wide error type.

/// Errors surfaced by any layer of the scheme.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unsupported security level: {0}")]
    UnsupportedSecurityLevel(u32),

    #[error("policy syntax error at byte {position}: {message}")]
    PolicySyntax { position: usize, message: String },

    #[error("threshold {threshold} out of bounds for {children} children")]
    ThresholdOutOfBounds { threshold: usize, children: usize },

    #[error("attribute set is empty")]
    EmptyAttributeSet,

    #[error("attribute not held: {0}")]
    AttributeNotHeld(String),

    #[error("access tree unsatisfied")]
    TreeUnsatisfied,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("authentication failure")]
    Authentication,

    #[error("query signature verification failed")]
    SignatureInvalid,

    #[error("triple not present in vocabulary: {0}")]
    UnknownTriple(String),

    #[error("vocabulary capacity exceeded: {needed} dimensions needed, capacity is {capacity}")]
    CapacityExceeded { needed: usize, capacity: usize },

    #[error(
        "index was built against vocabulary version {index}, newer than query version {query}"
    )]
    VocabularyVersion { index: u64, query: u64 },

    #[error("duplicate {kind} id: {id}")]
    DuplicateId { kind: &'static str, id: String },

    #[error("unknown {kind}: {id}")]
    UnknownId { kind: &'static str, id: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed envelope: {0}")]
    Envelope(String),

    #[error("decode error: {0}")]
    Decode(String),

    #[error("workspace error: {0}")]
    Workspace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
