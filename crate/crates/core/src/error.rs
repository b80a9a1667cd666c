use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// The result would overflow the supported numeric range.
    #[error("range error: {0}")]
    Range(String),
    /// The request exceeds an enumeration or memory bound.
    #[error("resource bound exceeded: {0}")]
    Resource(String),
    /// A probability needed as a divisor is zero.
    #[error("degenerate probability: {0}")]
    DegenerateProbability(String),
    /// The asymptotic formula has a singular term at the requested point.
    #[error("singular term: {0}")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
