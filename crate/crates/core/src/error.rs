use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid sampler, integrator or oracle configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// Parameter outside the perturbative range of the closed forms.
    #[error("domain error: {0}")]
    Domain(String),
    /// An operation was called outside its declared precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
