use thiserror::Error;

/// Errors raised by the workbench library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AoaError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("level {level} out of range 1..={s}")]
    LevelOutOfRange { level: u32, s: u32 },
    #[error("column index {0} out of range")]
    ColumnOutOfRange(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{0} is not a prime power")]
    NotPrimePower(u32),
    #[error("not an orthogonal array: {0}")]
    NotOa(String),
    #[error("column {0} is constant under the contrast")]
    SingularColumn(usize),
    #[error("symmetry violation: {0}")]
    Symmetry(String),
    #[error("search space too large: {0:.3e} states")]
    SpaceTooLarge(f64),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("model error: {0}")]
    Model(String),
    #[error("field error: {0}")]
    Field(String),
}

pub type Result<T> = std::result::Result<T, AoaError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(AoaError::InvalidParameter(msg.into()))
}
