//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A model or distribution was given parameters outside its domain, or
    /// an operation was asked to combine unsupported variants.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The operation is only defined for a restricted model class
    /// (e.g. the Markov solver needs finite-atom response laws).
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// A hard resource cap was exceeded (enumeration depth, state closure).
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// A caller-side precondition did not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
