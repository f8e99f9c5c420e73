use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A point lies outside the canonical domain of its manifold.
    #[error("point out of domain: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The lattice search behind a basis request would exceed its budget.
    #[error("resource budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("group too large to enumerate: closure exceeds cap of {cap} elements")]
    GroupTooLarge { cap: usize },

    #[error("group/manifold mismatch: {0}")]
    GroupMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// A projected coefficient block violates its invariance constraints.
    #[error("projection residual {0:e} exceeds feasibility tolerance")]
    Infeasible(f64),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
