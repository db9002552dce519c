use std::fmt;

/// Why a monotone iteration was abandoned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonConvergenceReason {
    /// The iterate came within the safety margin of the singular value 1.
    Touchdown,
    /// Successive updates kept growing.
    Diverging,
    /// The iteration budget ran out.
    IterationBudget,
    /// An iterate decreased, which cannot happen below the extremal parameter.
    LostMonotonicity,
}

impl fmt::Display for NonConvergenceReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Touchdown => "iterate reached the touchdown safety margin",
            Self::Diverging => "updates kept growing",
            Self::IterationBudget => "iteration budget exhausted",
            Self::LostMonotonicity => "iterates stopped increasing",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("linear solver failure: {0}")]
    Solver(String),
    #[error("no convergence at lambda = {lambda}: {reason} after {iterations} iterations")]
    NonConvergence {
        lambda: f64,
        reason: NonConvergenceReason,
        iterations: usize,
        last_sup: f64,
    },
    #[error("spectral failure: {message} (last estimate {last_estimate})")]
    Spectral { message: String, last_estimate: f64 },
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("weight construction failed: {0}")]
    WeightConstruction(String),
    #[error("inconsistent state: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
