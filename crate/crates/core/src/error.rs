//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A text file (corpus, vocabulary, embeddings, config) violated its format.
    #[error("{source_name}:{line}: {msg}")]
    Parse {
        source_name: String,
        line: usize,
        msg: String,
    },

    #[error("empty vocabulary")]
    EmptyVocabulary,

    #[error("empty input")]
    EmptyInput,

    #[error("no tokens")]
    NoTokens,

    #[error("invalid range: lo {lo} must be below hi {hi}")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("word id {id} out of range for vocabulary of size {size}")]
    WordIdOutOfRange { id: usize, size: usize },

    #[error("tag id {id} out of range for tag set of size {size}")]
    TagIdOutOfRange { id: usize, size: usize },

    #[error("unknown tag: {0}")]
    UnknownTag(String),

    #[error("gradient blowup: non-finite gradient in {0}")]
    GradientBlowup(String),

    #[error("cannot corrupt: replacement pool needs at least 2 words")]
    CannotCorrupt,

    #[error("bad magic: not a model container")]
    BadMagic,

    #[error("unsupported container version {0}")]
    UnsupportedVersion(u32),

    #[error("truncated container")]
    Truncated,

    #[error("corrupt container: {0}")]
    Corrupt(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
