use thiserror::Error;

use crate::weights::Family;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lower limit {lower} exceeds upper limit {upper}")]
    InvertedLimits { lower: f64, upper: f64 },

    #[error("non-finite value {value} in {context}")]
    NonFinite { value: f64, context: String },

    #[error("negative range {range} at cell ({row}, {col})")]
    NegativeRange { row: usize, col: usize, range: f64 },

    #[error("non-finite entry at cell ({row}, {col})")]
    NonFiniteCell { row: usize, col: usize },

    #[error("duplicate object id {0:?}")]
    DuplicateId(String),

    #[error("duplicate variable name {0:?}")]
    DuplicateVariable(String),

    #[error("row {row} has {found} cells, expected {expected}")]
    RaggedRow { row: usize, expected: usize, found: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("column {index} out of range for {dim} variables")]
    ColumnOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("variable {0:?} has zero symbolic variance")]
    ZeroVariance(String),

    #[error("{what} is not positive semidefinite (min eigenvalue {min_eigenvalue})")]
    NotPsd { what: &'static str, min_eigenvalue: f64 },

    #[error("covariance kind must be in 1..=8, got {0}")]
    InvalidKind(u8),

    #[error("negative-range rejection rate {rate:.3} exceeds 0.5; mean and spread of the ranges imply frequent negative draws")]
    RejectionRate { rate: f64 },

    #[error("micro value {value} of group {group:?}, variable {variable:?} lies outside [{lower}, {upper}]")]
    OutsideInterval {
        group: String,
        variable: String,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("group {0:?} is not present in the macro-data")]
    UnknownGroup(String),

    #[error("{0} is not a continuous weight model")]
    NotContinuous(Family),

    #[error("sample of size {found} is too small, need at least {needed} ({context})")]
    SampleTooSmall {
        needed: usize,
        found: usize,
        context: String,
    },

    #[error("sample is not sorted in nondecreasing order")]
    Unsorted,

    #[error("value {value} lies outside the support of {family}")]
    OutsideSupport { value: f64, family: Family },

    #[error("no usable weights: every cell is missing")]
    NoUsableWeights,

    #[error("line {line}: {message}")]
    Format { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by the data being statistically unusable
    /// rather than malformed.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::SampleTooSmall { .. } | Error::NoUsableWeights | Error::RejectionRate { .. }
        )
    }

    pub(crate) fn format(line: u64, message: impl Into<String>) -> Self {
        Error::Format {
            line,
            message: message.into(),
        }
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        let line = err.position().map(|p| p.line()).unwrap_or(0);
        match err.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            kind => Error::Format {
                line,
                message: format!("{kind:?}"),
            },
        }
    }
}
