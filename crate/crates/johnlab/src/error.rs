use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty domain: no occupied cell")]
    EmptyDomain,
    #[error("unbounded-no-boundary: full occupancy with all window faces open")]
    UnboundedNoBoundary,
    #[error("not-joinable: {0}")]
    NotJoinable(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("not-BT-eligible: H_{p} has rank {rank}")]
    NotBtEligible { p: usize, rank: usize },
    #[error("internal invariant breach: {0}")]
    Invariant(String),
    #[error("coefficient budget exceeded in integer reduction")]
    CoefficientBudget,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit code contract: 2 for precondition/parse failures,
    /// 3 for internal invariant breaches, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Precondition(_) | Error::Parse(_) | Error::Json(_) => 2,
            Error::Invariant(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
