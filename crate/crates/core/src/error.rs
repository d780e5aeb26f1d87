use thiserror::Error;

/// Errors raised by the MM driver and the individual solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MmError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite {what} at iteration {iteration}")]
    NonFinite { what: &'static str, iteration: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parameter outside its domain: {0}")]
    Domain(String),

    #[error("iterate escaped domain: {0}")]
    EscapedDomain(String),

    #[error("MLE may not exist: {0}")]
    MleMayNotExist(String),

    #[error("omega not positive definite")]
    NotPositiveDefinite,

    #[error("scale collapsed: updated omega is singular")]
    ScaleCollapsed,

    #[error("no interior mass: every count is right-censored")]
    NoInteriorMass,

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("saturated graph: edge density {density} has no finite background propensity")]
    SaturatedGraph { density: f64 },

    #[error("point is not a fixed point of the MM map (residual {residual:e})")]
    NotFixedPoint { residual: f64 },

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl MmError {
    /// Errors that describe a legitimate divergent outcome of an iteration
    /// rather than bad input. The driver turns these into a diverged
    /// termination and keeps the partial trace.
    pub fn is_divergence(&self) -> bool {
        matches!(self, MmError::EscapedDomain(_) | MmError::MleMayNotExist(_))
    }
}

impl From<std::io::Error> for MmError {
    fn from(e: std::io::Error) -> Self {
        MmError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, MmError>;
