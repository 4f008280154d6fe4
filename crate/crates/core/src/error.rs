use thiserror::Error;

/// Errors surfaced by the library.
///
/// Variants split into two families that callers (the CLI in particular)
/// treat differently: resource errors (`ResourceLimit`) meaning the request is
/// valid but too large for the exact path, and everything else, which is a
/// validation or numerical failure.
#[derive(Debug, Error)]
pub enum SmuError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinate {index} must be strictly positive, got {value}")]
    NonPositiveCoordinate { index: usize, value: f64 },

    #[error("invalid mixing measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not a scale mixture of uniforms: cell {cell:?} has increment {mass:e}")]
    MembershipViolation { cell: Vec<usize>, mass: f64 },

    #[error("KL divergence undefined: q vanishes on cell {cell:?} where p = {p_value:e}")]
    AbsoluteContinuity { cell: Vec<usize>, p_value: f64 },

    #[error("fitted density is zero at observation {index}")]
    ZeroDensity { index: usize },

    #[error("resource limit: {what} needs {requested} cells, limit is {limit}; use the Monte Carlo path")]
    ResourceLimit {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("quadrature did not converge on cell {cell:?}")]
    Quadrature { cell: Vec<usize> },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl SmuError {
    pub fn is_resource(&self) -> bool {
        matches!(self, SmuError::ResourceLimit { .. })
    }
}

pub type Result<T> = std::result::Result<T, SmuError>;
