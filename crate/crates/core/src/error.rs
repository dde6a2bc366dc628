use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("constraint ({x} -> {y}, N={n}) is not guarded by any relation")]
    UnguardedConstraint { x: String, y: String, n: u64 },

    #[error("constraint dependency graph is cyclic (witness {witness:?})")]
    CyclicConstraints { witness: Vec<usize> },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("attribute {0} is not covered by any relation")]
    UncoveredAttribute(String),

    #[error("fragment lookup miss at level {level}: prefix inconsistent with guard")]
    EmptyDenominator { level: usize },

    #[error("vertex {vertex} has degree {degree} exceeding lambda = {lambda}")]
    LambdaViolation { vertex: String, degree: usize, lambda: u64 },

    #[error("degenerate generator spec: {0}")]
    DegenerateSpec(String),

    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
