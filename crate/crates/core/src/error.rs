use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("invalid dimension {0}")]
    InvalidDimension(usize),

    #[error("not Hermitian: max |M - M^dagger| = {0:e}")]
    NotHermitian(f64),

    #[error("not positive semidefinite: min eigenvalue {0:e}")]
    NotPsd(f64),

    #[error("trace is not one: {0}")]
    TraceNotOne(f64),

    #[error("vector is not normalized: {0}")]
    NotNormalized(f64),

    #[error("probability vector has a negative entry {0:e}")]
    NegativeProbability(f64),

    #[error("not unitary: max |U^dagger U - 1| = {0:e}")]
    NotUnitary(f64),

    #[error("POVM effects do not sum to identity: max deviation {0:e}")]
    IncompletePovm(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("QR factorization degenerate after {attempts} attempts")]
    DegenerateQr { attempts: usize },

    #[error("rank {rank} out of range for dimension {dim}")]
    RankOutOfRange { rank: usize, dim: usize },

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("outcome {outcome} has probability {probability:e} under the current posterior")]
    ZeroProbabilityOutcome { outcome: usize, probability: f64 },

    #[error("outcome {outcome} out of range for {len} outcomes")]
    OutcomeOutOfRange { outcome: usize, len: usize },

    #[error("frame potential at t={order} is {value}, expected {expected}")]
    CertificationFailed { order: u32, value: f64, expected: f64 },

    #[error("ensemble average state has numerical rank 0")]
    DegenerateEnsemble,

    #[error("posterior identity violated: deviation {0:e}")]
    IdentityViolated(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
