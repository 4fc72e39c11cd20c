use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A numeric input lies outside the domain where the model is defined.
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),
    /// The inputs are individually valid but do not form a usable setup.
    #[error("configuration error: {0}")]
    Configuration(String),
    /// The requested construction does not exist for these inputs.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    /// A structural property the solver relies on failed to hold.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::ParameterDomain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Configuration(msg.into())
}
