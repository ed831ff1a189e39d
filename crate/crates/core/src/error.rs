use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("eigenvalues {first} and {second} coincide (indices {i}, {j})")]
    DuplicateEigenvalue { i: usize, j: usize, first: f64, second: f64 },

    #[error("zero eigenvalue at index {0}")]
    ZeroEigenvalue(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("channel of size {size} exceeds the dense limit {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("vector is outside the {domain} domain (constraint defect {defect:e}, allowed {allowed:e})")]
    OutsideDomain { domain: &'static str, defect: f64, allowed: f64 },

    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("wave packet is not admissible: {0}")]
    Inadmissible(String),

    #[error("function is not admissible for this spectrum: {0}")]
    NotAdmissible(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
