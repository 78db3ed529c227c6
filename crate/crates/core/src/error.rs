use thiserror::Error;

/// Errors raised by model construction, propagation, scoring and search.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("malformed pulse sequence: {0}")]
    MalformedSequence(String),

    #[error("search space of {size} genomes exceeds the exhaustive bound of {bound}")]
    SearchSpaceTooLarge { size: u128, bound: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::ParameterDomain(msg.into()))
}
