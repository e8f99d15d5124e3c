use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("Bloch vector length {0} exceeds 1")]
    BlochTooLong(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("{name} out of range: {reason}")]
    OutOfRange { name: &'static str, reason: String },

    #[error("detection strength kappa = {0} exceeds 1")]
    UnphysicalDetection(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_range<T>(name: &'static str, reason: impl Into<String>) -> Result<T> {
    Err(Error::OutOfRange {
        name,
        reason: reason.into(),
    })
}
