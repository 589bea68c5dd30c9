use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("solver did not converge after {iterations} iterations (best residual {residual:.3e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("resolution refused: {what} needs {required} nodes, limit is {limit}")]
    Resolution {
        what: String,
        required: usize,
        limit: usize,
    },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("insufficient dynamic range: {0}")]
    DynamicRange(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("counting box too small: {0}")]
    BoxTooSmall(String),

    #[error("degenerate draw, retry with another seed: {0}")]
    Retry(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LabError {
    /// Resolution and box-size refusals carry a hint for the caller instead
    /// of a wrong answer.
    pub fn is_refusal(&self) -> bool {
        matches!(self, LabError::Resolution { .. } | LabError::BoxTooSmall(_))
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
