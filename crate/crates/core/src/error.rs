use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension vector ({a}, {b}) is not coprime")]
    NotCoprime { a: u64, b: u64 },

    #[error("census of about {estimate} labeled trees exceeds the budget of {budget}")]
    BudgetExceeded { estimate: String, budget: u128 },

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
