use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An operation was handed an input outside its contract (wrong
    /// representation, rank, dimension, negative time, ...).
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("configuration error: {0}")]
    Config(String),
    /// Quadrature or other numerical procedure failed to reach tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("blow-up at t = {time}: {reason}")]
    BlowUp { time: f64, reason: String },
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
