use thiserror::Error;

/// Errors returned by the polar toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violates the operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The input lies outside the range where the analytical formula is defined.
    #[error("outside model range: {0}")]
    OutOfModel(String),
    /// The analytical model produces a non-physical result for these inputs.
    #[error("model breakdown: {0}")]
    ModelBreakdown(String),
    /// A text input (mask file, LLR frame) could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
