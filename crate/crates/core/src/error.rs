use thiserror::Error;

/// Errors raised by the geometry and verification pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The induced Gram form has an eigenvalue within tolerance of zero.
    #[error("degenerate metric: Gram eigenvalue {eigenvalue:e} is within tolerance {tol:e} of zero")]
    DegenerateMetric { eigenvalue: f64, tol: f64 },

    /// The orthogonal complement of the tangent space is a null line.
    #[error("normal not found: orthogonal complement is null (|<v,v>| = {norm:e})")]
    NormalNotFound { norm: f64 },

    #[error("unsupported operator dimension {0} (only 2 and 3 are classified)")]
    UnsupportedDimension(usize),

    #[error("parameter constraint violated: {0}")]
    ConstraintViolation(String),

    #[error("vectors are not tangent to the space form at the given point (residual {0:e})")]
    NotTangent(f64),

    #[error("chart does not provide analytic derivatives")]
    MissingDerivatives,

    #[error("point {0:?} is outside the chart domain or too close to its boundary")]
    OutsideDomain(Vec<f64>),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid k(s) specification: {0}")]
    InvalidKSpec(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
