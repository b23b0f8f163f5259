use thiserror::Error;

use crate::C64;

pub type Result<T> = std::result::Result<T, HscError>;

#[derive(Debug, Error)]
pub enum HscError {
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular point: denominator modulus {modulus:e} below {eps:e}")]
    Singular { modulus: f64, eps: f64 },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    #[error("variable z{index} exceeds dimension {dim}")]
    VariableOutOfRange { index: usize, dim: usize },

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalog(String),

    #[error("metric `{name}` is not Hermitian at {point:?}: defect {defect:e}")]
    HermitianDefect {
        name: String,
        point: Vec<C64>,
        defect: f64,
    },

    #[error("metric `{name}` is not positive definite at {point:?}: smallest eigenvalue {min_eigenvalue:e}")]
    NotPositiveDefinite {
        name: String,
        point: Vec<C64>,
        min_eigenvalue: f64,
    },

    #[error("point {point:?} lies outside the chart box")]
    OutsideBox { point: Vec<C64> },

    #[error("metric matrix is ill-conditioned (condition number {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("holomorphic sectional curvature numerator has imaginary part {imag:e} (real part {real:e})")]
    ComplexNumerator { real: f64, imag: f64 },

    #[error("direction vector is zero")]
    ZeroVector,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("search exhausted: {0}")]
    Exhausted(String),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
