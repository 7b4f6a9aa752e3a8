use thiserror::Error;

/// Errors raised by the grid, mollifier, and audit operations.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("invalid exponent {0}: must be >= 1 or infinite")]
    InvalidExponent(f64),
    #[error("invalid radius {radius}: must be at least the grid spacing {h}")]
    InvalidRadius { radius: f64, h: f64 },
    #[error("under-resolved kernel: epsilon {epsilon} is below grid spacing {h}")]
    UnderResolvedKernel { epsilon: f64, h: f64 },
    #[error("misaligned translation: 2*epsilon/h = {ratio} is not an integer")]
    MisalignedTranslation { ratio: f64 },
    #[error("truncation contamination: support margin {margin} layers, {required} required")]
    TruncationContamination { margin: usize, required: usize },
    #[error("rate undefined: {0}")]
    RateUndefined(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed field data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> LabError {
    LabError::InvalidParameter(msg.into())
}
