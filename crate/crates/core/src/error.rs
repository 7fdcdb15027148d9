use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("graph has {vertices} vertices, exact colouring is limited to {limit}")]
    TooManyVertices { vertices: usize, limit: usize },
    #[error("triangulation failed: {0}")]
    Triangulation(String),
    #[error("mesh is not reflection-symmetric about the axis: {0}")]
    NotSymmetric(String),
    #[error("interface {0} has no interaction strength")]
    MissingInterface(usize),
    #[error("degree-of-freedom maps do not match: {0}")]
    DofMismatch(String),
    #[error("Rayleigh quotient of a zero vector")]
    ZeroVector,
    #[error("matrix is not positive definite (failed at pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },
    #[error("dimension {dim} exceeds the limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("root bracketing failed: {0}")]
    Bracketing(String),
    #[error("test function support exceeds the computational box: {0}")]
    SupportExceedsBox(String),
    #[error("indicator functions need the neumann boundary policy")]
    IndicatorNeedsNeumann,
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
