use std::path::PathBuf;

/// Errors raised by the library and the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A documented precondition does not hold for the given inputs.
    #[error("precondition violated: {0}")]
    Domain(String),

    /// A configured size cap would be exceeded.
    #[error("{what}: requested {requested} exceeds cap {cap}")]
    CapExceeded {
        what: &'static str,
        requested: String,
        cap: String,
    },

    /// A sample set became empty after filtering.
    #[error("empty sample: {0}")]
    EmptySample(String),

    /// A cache or input file is malformed.
    #[error("corrupt file {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True when the error is a refusal caused by the caller's inputs rather
    /// than an internal failure.
    pub fn is_refusal(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::CapExceeded { .. } | Error::EmptySample(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
