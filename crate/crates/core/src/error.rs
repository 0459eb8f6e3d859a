use thiserror::Error;

/// Errors raised by the geometry routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("epsilon must lie in [0, 1], got {0}")]
    InvalidEpsilon(f64),
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("invalid chart {chart} for a family with {charts} charts")]
    InvalidChart { chart: usize, charts: usize },
    #[error("expected {expected} real coordinates, got {got}")]
    CoordinateLength { expected: usize, got: usize },
    #[error("point lies outside the overlap with chart {0}")]
    OutsideOverlap(usize),
    #[error("metric is singular at this point")]
    SingularMetric,
    #[error("variation field has mode ({m}, {k}) beyond cap {cap}")]
    ModeCapExceeded { m: i32, k: i32, cap: i32 },
    #[error("variation field violates the reality constraint at mode ({m}, {k})")]
    RealityViolated { m: i32, k: i32 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("field has a tangential component of size {0:.3e}")]
    NotNormal(f64),
    #[error("integration window reaches the pole of the closed-form solution at t = {pole}")]
    StepTooLarge { pole: f64 },
}

pub type Result<T> = std::result::Result<T, GeometryError>;
