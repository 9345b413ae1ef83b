use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of a physical formula.
    #[error("domain error: {0}")]
    Domain(String),
    /// A function was called with arguments that violate its contract.
    #[error("usage error: {0}")]
    Usage(String),
    #[error("unknown species `{0}`")]
    UnknownSpecies(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("search failed: {0}")]
    SearchFailed(String),
    #[error("did not converge: {0}")]
    Convergence(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}
