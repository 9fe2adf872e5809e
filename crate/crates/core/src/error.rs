use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector has a non-finite coordinate")]
    NonFinite,
    #[error("invalid set: {0}")]
    InvalidSet(String),
    #[error("polyhedron is empty")]
    EmptyPolyhedron,
    #[error("intersection is empty")]
    EmptyIntersection,
    #[error("point is not in the set (distance {distance:e})")]
    Membership { distance: f64 },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("estimator requires convex sets")]
    NonConvexInput,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid estimator configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
