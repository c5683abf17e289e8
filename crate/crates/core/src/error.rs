//! Crate-wide error type. Every fallible operation returns [`Result`].

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A scalar or dimension argument violates an operation's contract.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A runtime input (sample, symbol, config value) is malformed.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Channel vector or matrix has no usable energy.
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    /// The requested design cannot exist (e.g. more users than antennas).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The user Gram matrix is singular or numerically unusable.
    #[error("singular channel: {0}")]
    SingularChannel(String),

    /// An exhaustive search would exceed the hard enumeration cap.
    #[error("complexity cap exceeded: {0}")]
    ComplexityCap(String),

    /// Two inputs that must agree in shape do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Experiment configuration is missing, malformed, or inconsistent.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
