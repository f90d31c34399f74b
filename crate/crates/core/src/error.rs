use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state: length {len} is not a power of two")]
    InvalidState { len: usize },

    #[error("state dimension mismatch: expected {expected} amplitudes, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("malformed problem: {0}")]
    MalformedProblem(String),

    #[error("n = {n} exceeds the full-lattice simulation cap of {cap} (raise it with --max-n)")]
    CapExceeded { n: usize, cap: usize },

    #[error("no step produced any solution amplitude")]
    NoSolutionAmplitude,

    #[error("state norm drifted by {deviation:e} at step {step}")]
    NormDrift { step: usize, deviation: f64 },

    #[error("infeasible ensemble: m = {m} exceeds m_max = {m_max}")]
    InfeasibleSpec { m: usize, m_max: usize },

    #[error("malformed graph: {0}")]
    MalformedGraph(String),

    #[error("malformed clause: {0}")]
    MalformedClause(String),

    #[error("search space too large for enumeration: {0}")]
    SearchSpaceTooLarge(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
