use thiserror::Error;

pub type Result<T, E = ApError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ApError {
    /// A value left the exact 64-bit range.
    #[error("arithmetic range exceeded: {0}")]
    ArithmeticRange(String),

    /// An input violated an operation's preconditions.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested search is larger than the configured ceiling.
    #[error("infeasible: {0}")]
    Feasibility(String),

    #[error("cache format error at {location}: {message}")]
    Format { location: String, message: String },

    #[error("cache conflict for {query}: stored {stored}, new {new}")]
    Conflict {
        query: String,
        stored: String,
        new: String,
    },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// Two sources disagree on the same M(n).
    #[error("provenance mismatch at n={n}: table {table}, computed {computed}")]
    ProvenanceMismatch {
        n: usize,
        table: String,
        computed: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn range_err(what: impl Into<String>) -> ApError {
    ApError::ArithmeticRange(what.into())
}
