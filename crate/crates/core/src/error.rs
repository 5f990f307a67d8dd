use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalogEntry(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty box: lo[{axis}] = {lo} is not below hi[{axis}] = {hi}")]
    EmptyBox { axis: usize, lo: f64, hi: f64 },

    #[error("weight `{label}` is not strictly positive at {point:?}")]
    NotPositive { label: String, point: Vec<f64> },

    #[error("non-finite integrand value {value} at node {point:?}")]
    NonFinite { value: f64, point: Vec<f64> },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("matrix exponential overflow: {0}")]
    Overflow(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
