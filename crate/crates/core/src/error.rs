use thiserror::Error;

use crate::expr::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("map {index} is not injective (scale component {dim} is zero)")]
    NonInjectiveMap { index: usize, dim: usize },
    #[error("map family is empty")]
    EmptyFamily,
    #[error("point {point:?} lies outside the domain")]
    DomainError { point: Vec<f64> },
    #[error("evaluation failed: {0}")]
    EvalError(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("point {point:?} lies in no partition image")]
    PartitionGap { point: Vec<f64> },
    #[error("operator is not contractive (s = {s})")]
    NotContractive { s: f64 },
    #[error("no convergence after {iterations} iterations (a-priori bound {bound:e})")]
    MaxIterations { iterations: usize, bound: f64 },
    #[error("degenerate scale: 1 - s vanishes at {point}")]
    DegenerateScale { point: f64 },
    #[error("interpolation abscissae are not strictly increasing")]
    UnsortedData,
    #[error("scale function {index} has sup bound {bound} >= 1")]
    ScaleTooLarge { index: usize, bound: f64 },
    #[error("join-up condition violated at knot {knot} (residual {residual:e})")]
    InconsistentJoinUp { knot: f64, residual: f64 },
    #[error("initial function has norm {norm} outside the invariant ball of radius {radius}")]
    OutsideInvariantBall { norm: f64, radius: f64 },
    #[error("level {level}: outer maps do not fix the endpoints 0 and 1")]
    EndpointMismatch { level: usize },
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("zero quaternion has no inverse")]
    ZeroDivisor,
    #[error("quaternion has nonzero scalar part {0}")]
    NotAVector(f64),
    #[error("axis {0} out of range 0..=3")]
    BadAxis(usize),
    #[error("value type mismatch: {0}")]
    ValueKind(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}
