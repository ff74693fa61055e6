use thiserror::Error;

/// Errors raised anywhere in the simulation stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("infeasible degrees: {0}")]
    InfeasibleDegrees(String),
    #[error("invalid factor graph: {0}")]
    InvalidGraph(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("sparsity mismatch: user {user}, symbol {symbol} has a nonzero entry on unoccupied resource {resource}")]
    SparsityMismatch {
        user: usize,
        symbol: usize,
        resource: usize,
    },
    #[error(
        "power violation: user {user}, symbol {symbol} has squared norm {energy} (expected 1)"
    )]
    PowerViolation {
        user: usize,
        symbol: usize,
        energy: f64,
    },
    #[error(
        "duplicate codeword: order {order}, user {user}, symbols {first} and {second} coincide"
    )]
    DuplicateCodeword {
        order: usize,
        user: usize,
        first: usize,
        second: usize,
    },
    #[error("inconsistent codebook families: {0}")]
    InconsistentFamilies(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("rank {rank} out of range for {n_avail} choose {t}")]
    RankOutOfRange { rank: u64, n_avail: usize, t: usize },
    #[error("bit pattern {pattern} outside the order-{order} mapper table")]
    BitsOutOfTable { order: usize, pattern: u64 },
    #[error("invalid length: expected {expected} bits, got {got}")]
    InvalidLength { expected: usize, got: usize },
    #[error("index set {set:?} is not an entry of the order-{order} mapper table")]
    UnmappableIndexSet { order: usize, set: Vec<usize> },
    #[error("invalid mapper table: {0}")]
    InvalidMapper(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("empty candidate set for order {order}")]
    EmptyCandidateSet { order: usize },
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),
    #[error("pole encountered: 2N0 = {two_n0} does not exceed (2/3)*lambda2 = {limit}")]
    PoleEncountered { two_n0: f64, limit: f64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
