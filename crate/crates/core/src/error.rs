use thiserror::Error;

/// Errors produced by the Gaussian-state routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("symplectic eigenvalue pairing failed: {0}")]
    Pairing(String),

    #[error("degenerate symplectic subspace could not be normalized")]
    DegenerateSubspace,

    #[error("unphysical state: smallest symplectic eigenvalue {0} is below 1/2")]
    Unphysical(f64),

    #[error("pure direction: symplectic eigenvalue {0} too close to 1/2, exponential matrix diverges")]
    PureDirection(f64),

    #[error("exponential matrix has a non-positive symplectic spectrum")]
    NonPositiveSpectrum,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no border state: {0}")]
    NoBorder(String),

    #[error("state is separable: {0}")]
    Separable(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("search failure: {0}")]
    SearchFailure(String),
}

/// Coarse error classes, used by the command line for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    NumericalGuard,
    Search,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Dimension(_)
            | Error::NotSymmetric(_)
            | Error::InvalidArgument(_)
            | Error::Unphysical(_)
            | Error::Separable(_) => ErrorClass::Validation,
            Error::SearchFailure(_) => ErrorClass::Search,
            _ => ErrorClass::NumericalGuard,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
