//! Error types shared across the crate.

use thiserror::Error;

/// Unified error type. The CLI maps variants onto process exit codes
/// (config errors -> 2, numerical blow-up -> 3).
#[derive(Debug, Error)]
pub enum Error {
    /// Two fields or ensembles do not share grid parameters.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An operator was applied to a field of the wrong dimensionality.
    #[error("unsupported operation: {0}")]
    UnsupportedOp(String),

    /// Invalid configuration or parameters outside declared model bounds.
    #[error("config error: {0}")]
    Config(String),

    /// A solver step produced a non-finite value.
    #[error("numerical blow-up: particle {particle} at t = {time} (pre-step energy {energy})")]
    BlowUp {
        particle: usize,
        time: f64,
        energy: f64,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn dim(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
