use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrescoError {
    /// A caller-supplied value violates an operation's precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Candidate enumeration would exceed the configured cap.
    #[error("resource limit exceeded: {what} needs {needed} candidates, cap is {cap}")]
    ResourceLimit {
        what: &'static str,
        needed: u128,
        cap: u64,
    },

    /// A post-condition check failed; indicates a bug rather than bad input.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl FrescoError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        FrescoError::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, FrescoError>;
