use thiserror::Error;

/// Errors produced by grid construction, spectral operators, the time
/// stepper and the verification machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite field: {0}")]
    NonFiniteField(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("blow-up detected at t = {t}")]
    BlowUp { t: f64 },

    #[error("zero wave vector")]
    ZeroWaveVector,

    #[error(
        "mean-profile constraint g*k*H'(lambda) + f*m*F'(lambda) = 0 violated \
         (max residual {residual:.3e} at lambda = {lambda})"
    )]
    BeamConstraint { residual: f64, lambda: f64 },

    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("snapshot format: {0}")]
    SnapshotFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
