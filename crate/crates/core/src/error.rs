use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid word: {0}")]
    InvalidWord(String),

    #[error("the identity has no parent")]
    IdentityInput,

    #[error("size cap exceeded: {what} needs {needed}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        needed: String,
        cap: String,
    },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("mismatched sample spaces: {0} vs {1} points")]
    MismatchedSpaces(usize, usize),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("system failed validation:\n{0}")]
    Validation(crate::systems::ValidationReport),

    #[error("partition is not generating: {0}")]
    NotGenerating(String),

    #[error("set is not connected in the Cayley tree; its hull has {hull_size} elements: {hull}")]
    Disconnected { hull_size: usize, hull: String },

    #[error("{0} is not a subset of the pattern support")]
    NotSubset(String),

    #[error("rank mismatch: {0}")]
    RankMismatch(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn cap(what: &'static str, needed: impl ToString, cap: impl ToString) -> Self {
        Error::CapExceeded {
            what,
            needed: needed.to_string(),
            cap: cap.to_string(),
        }
    }
}
