use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid no-signaling box: {0}")]
    InvalidBox(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("wrong parameter count: expected {expected}, got {got}")]
    WrongParameterCount { expected: usize, got: usize },
    #[error("waveplate compilation failed: residual {residual:.3e} above threshold")]
    CompilationResidual { residual: f64 },
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("gate label parse error: {0}")]
    LabelParse(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
