use thiserror::Error;

/// Errors raised by the sampling-recovery toolkit.
#[derive(Debug, Error)]
pub enum FaberError {
    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("level entry {0} outside the supported range [-1, 62]")]
    LevelOutOfRange(i64),

    #[error("truncation budget {0} exceeds the supported maximum of 62")]
    BudgetTooLarge(u32),

    #[error("translation {k:?} out of range for level {level:?}")]
    TranslationOutOfRange { level: Vec<i32>, k: Vec<u64> },

    #[error("dyadic coordinate {numerator}/2^{level} is not a valid point of [0, 1]")]
    InvalidDyadic { numerator: u64, level: u32 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point {0:?} lies outside the unit cube")]
    OutsideCube(Vec<f64>),

    #[error("function returned non-finite value {value} at {point:?}")]
    NonFinite { point: Vec<f64>, value: f64 },

    #[error("level {0} is not stored in the series")]
    MissingLevel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mesh with {cells} cells is too large for composite quadrature; use stratified_mc")]
    MeshTooLarge { cells: u128 },

    #[error("only {usable} usable records for a rate fit, at least 4 are needed")]
    TooFewRecords { usable: usize },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, FaberError>;
