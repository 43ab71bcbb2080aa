//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated an operation contract (wrong dimension, NaN, out of range).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The feasibility solver exhausted its iteration budget without a certificate.
    #[error(
        "no certificate found after {iterations} iterations; worst grid point {worst_point:?} \
         has minimal LMI eigenvalue {lambda_min:.6e}"
    )]
    NoCertificateFound {
        iterations: usize,
        worst_point: Vec<f64>,
        lambda_min: f64,
    },

    /// A matrix that must be invertible was numerically singular.
    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    /// Missing or inconsistent configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed or corrupted data file (certificate, trace, forecast CSV).
    #[error("data error: {0}")]
    Data(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
