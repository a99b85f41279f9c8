use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("{what} is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { what: &'static str, deviation: f64 },

    #[error("density matrix has negative eigenvalue {eigenvalue:.3e}")]
    NotPositive { eigenvalue: f64 },

    #[error("density matrix trace is {trace:.12}, expected 1")]
    BadTrace { trace: f64 },

    #[error("pure state has norm {norm:.12}, expected 1")]
    NotNormalized { norm: f64 },

    #[error("invalid projector {index}: {reason}")]
    InvalidProjector { index: usize, reason: String },

    #[error("invalid projector decomposition at step {step}: {diagnostic}")]
    InvalidDecomposition { step: usize, diagnostic: String },

    #[error("history index {index} appears in more than one cell")]
    OverlappingCells { index: usize },

    #[error("history index {index} out of range for {n} histories")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("null branch: probability {probability:.3e} is below the null threshold")]
    NullBranch { probability: f64 },

    #[error("every history in the set is null")]
    AllNull,

    #[error("{n} histories exceed the exact-search limit of {max}; use the closed-form bounds instead")]
    TooManyHistories { n: usize, max: usize },

    #[error("{parameter} = {value} is outside the valid region ({region})")]
    OutOfRange {
        parameter: &'static str,
        value: f64,
        region: String,
    },

    #[error("invalid input: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn out_of_range(parameter: &'static str, value: f64, region: impl Into<String>) -> Self {
        Error::OutOfRange {
            parameter,
            value,
            region: region.into(),
        }
    }
}
