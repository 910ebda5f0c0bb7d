use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate mode id `{0}`")]
    DuplicateMode(String),
    #[error("unknown mode id `{0}`")]
    UnknownMode(String),
    #[error("mode sets overlap on `{0}`")]
    OverlappingModes(String),
    #[error("mode-set mismatch: expected {expected} occupations, got {got}")]
    ModeSetMismatch { expected: usize, got: usize },
    #[error("occupation {occupation} of mode `{mode}` exceeds truncation {max}")]
    TruncationExceeded { mode: String, occupation: u32, max: u32 },
    #[error("duplicate basis state {0:?}")]
    DuplicateState(Vec<u32>),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian (max |A - A†| = {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (max |U†U - I| = {0:e})")]
    NotUnitary(f64),
    #[error("amplitude {amplitude:e} leaves the basis ({context})")]
    Leakage { amplitude: f64, context: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("gate `{gate}` applied outside its specified domain (amplitude {amplitude:e})")]
    OutOfDomain { gate: String, amplitude: f64 },
    #[error("check failed at `{step}`: {detail}")]
    StepMismatch { step: String, detail: String },
    #[error("synthesis did not converge: residual {residual:e} > tol {tol:e}")]
    SynthesisFailed { residual: f64, tol: f64 },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
