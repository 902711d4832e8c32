use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid signal spec: {0}")]
    InvalidSpec(String),

    #[error("degenerate signal: measurement matrix has zero energy")]
    DegenerateSignal,

    #[error("zero matrix has no signal subspace")]
    ZeroMatrix,

    #[error("requested rank {requested} exceeds numerical rank {available}")]
    RankDeficit { requested: usize, available: usize },

    #[error("only {available} admissible candidates remain, {requested} requested")]
    ExhaustedCandidates { requested: usize, available: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("column {0} is zero")]
    ZeroColumn(usize),

    #[error("at least two indices are required in delta \\ gamma")]
    InsufficientPairs,

    #[error("enumeration of {required} subsets exceeds budget of {budget}")]
    SizeGuard { required: u128, budget: u128 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("support is not contained in the candidate pool: {0}")]
    ContainmentViolation(String),

    #[error("non-finite entry in matrix")]
    NonFinite,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than I/O.
    pub fn is_config(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
