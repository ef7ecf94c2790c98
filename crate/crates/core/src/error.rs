use thiserror::Error;

pub type Result<T, E = XnlsError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum XnlsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid config key `{key}`: {detail}")]
    Config { key: String, detail: String },

    #[error("invalid field: {0}")]
    InvalidField(String),

    /// Exponent `4π|u|²` (or `(|u|/λ)²` for Orlicz integrands) above the cap.
    #[error("overflow guard: exponent {exponent:.3e} exceeds cap {cap} at cell {cell:?}")]
    OverflowGuard {
        exponent: f64,
        cap: f64,
        cell: Option<usize>,
    },

    #[error("boundary pollution at t = {t:.4}: boundary mass fraction {fraction:.3e} > {threshold:.1e}")]
    BoundaryPollution { t: f64, fraction: f64, threshold: f64 },

    #[error("Luxemburg bracket failure: {0}")]
    BracketFailure(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature budget exceeded: {0}")]
    QuadratureBudget(String),

    #[error("insufficient samples: {have} in interval, need at least {need}")]
    InsufficientSamples { have: usize, need: usize },

    #[error("inadmissible Strichartz pair (q = {q}, r = {r})")]
    InadmissiblePair { q: f64, r: f64 },

    #[error("empty bank")]
    EmptyBank,

    #[error("constraint violation for {member}: {detail}")]
    ConstraintViolation { member: String, detail: String },

    #[error("evaluation failure: {0}")]
    Evaluation(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl XnlsError {
    /// Runtime guards map to exit code 2 in the CLI; everything else is a usage/config failure.
    pub fn is_runtime_guard(&self) -> bool {
        matches!(
            self,
            XnlsError::OverflowGuard { .. }
                | XnlsError::BoundaryPollution { .. }
                | XnlsError::InsufficientSamples { .. }
                | XnlsError::QuadratureBudget(_)
                | XnlsError::BracketFailure(_)
        )
    }
}
