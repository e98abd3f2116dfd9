use thiserror::Error;

/// Errors raised by the tomography toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |A - A^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix has non-negligible imaginary entries (max |Im| = {residue:e})")]
    NotReal { residue: f64 },

    #[error("matrix is singular (s_min / s_max = {ratio:e})")]
    Singular { ratio: f64 },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("not a density matrix: {0}")]
    NotDensityShaped(String),

    #[error("requested time {time} lies outside the supported window [0, {limit}]")]
    TimeOutOfRange { time: f64, limit: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not reach tolerance {tolerance:e} (estimated error {estimate:e})")]
    QuadratureFailure { tolerance: f64, estimate: f64 },

    #[error("too few samples: need at least {required}, got {got}")]
    TooFewSamples { required: usize, got: usize },

    #[error("no plateau found: {0}")]
    PlateauNotFound(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
