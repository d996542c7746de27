use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A dimension, family size or atom count exceeded its configured cap.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("eigensolver did not converge on a {dim}x{dim} operator")]
    NonConvergence { dim: usize },
    /// Malformed input document.
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
