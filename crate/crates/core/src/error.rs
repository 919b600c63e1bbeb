use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported group type `{0}`")]
    UnsupportedType(String),
    #[error("rank {rank} out of range for type {kind}")]
    RankOutOfRange { kind: String, rank: u32 },
    #[error("group order {order} exceeds the orbit cap {cap}")]
    OrbitCapExceeded { order: String, cap: u64 },
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("polynomial is not invariant under reflection {0}")]
    NotInvariant(usize),
    #[error("linear solve failed: {0}")]
    SolveFailed(String),
    #[error("jacobian factorization failed: {0}")]
    FactorizationFailed(String),
    #[error("derivative order {requested} exceeds jet order {order}")]
    OrderExceeded { requested: u32, order: u32 },
    #[error("point is not a sample of the jet field")]
    PointNotInField,
    #[error("distances span {found} decades, need at least {needed}")]
    InsufficientScales { found: usize, needed: usize },
    #[error("jet base point does not match P(a)")]
    BasePointMismatch,
    #[error("singular identification system: {0}")]
    SingularSystem(String),
    #[error("jet is not in the image of composition (residual at {0})")]
    NotInImage(String),
    #[error("jacobian is singular at the given point")]
    SingularJacobian,
    #[error("missing derivative {beta} at interior sample {sample}")]
    MissingDerivative { beta: String, sample: usize },
    #[error("tolerance merges distinct strata; shrink tol")]
    AmbiguousStratum,
    #[error("neighbor graph is disconnected; increase k_neighbors or samples")]
    DisconnectedGraph,
    #[error("exact arithmetic unavailable: {0}")]
    InexactData(String),
    #[error("invalid jet field: {0}")]
    InvalidField(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
