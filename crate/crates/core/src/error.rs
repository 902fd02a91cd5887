use thiserror::Error;

/// Errors raised by the solvers, diagnostics and the experiment runner.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("negative value {value} where a nonnegative one is required")]
    Negative { value: f64 },

    #[error("time step {dt:e} exceeds the stability limit {limit:e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("blow-up detected at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("fluid state is not normalized (residual {0:e})")]
    Unnormalized(f64),

    #[error("state is vacuum everywhere; nothing to evaluate")]
    Vacuum,

    #[error("wavevector is not compatible with the periodic grid: {0}")]
    NonResonant(String),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
