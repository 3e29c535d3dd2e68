use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max |M - M^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("imaginary residue {residue:e} exceeds threshold {threshold:e} in {context}")]
    ImaginaryResidue {
        residue: f64,
        threshold: f64,
        context: &'static str,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("{what} requires a tuple of size {expected}, got {found}")]
    TupleSize {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("index {index} out of range for tuple of size {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("Fock truncation too small: tail weight {tail_weight:e} (try dim >= {suggested_dim})")]
    Truncation {
        tail_weight: f64,
        suggested_dim: usize,
    },

    #[error("unknown correction id `{0}`")]
    UnknownCorrection(String),

    #[error("unknown inequality id `{0}`")]
    UnknownInequality(String),

    #[error("objective evaluation failed at {params:?}: {message}")]
    Objective { params: Vec<f64>, message: String },

    #[error("grid of {points} points exceeds the limit of {limit}")]
    GridTooLarge { points: u128, limit: u128 },

    #[error("spec error at `{field}`: {message}")]
    Spec { field: String, message: String },
}

impl Error {
    pub(crate) fn spec(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Spec {
            field: field.into(),
            message: message.into(),
        }
    }
}
