use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{solver} solve failed to converge after {iterations} iterations (residual {residual:.3e}, tolerance {tolerance:.3e})")]
    SolverDiverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("advective CFL {cfl:.3} exceeds {limit} at t={t:.4} (step {step}); reduce dt")]
    CflViolation { cfl: f64, limit: f64, t: f64, step: u64 },

    #[error("flow scales undefined: {0}")]
    ScalesUndefined(String),

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error("run comparison error: {0}")]
    Compare(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
