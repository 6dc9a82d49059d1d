use thiserror::Error;

use crate::inference::FullParams;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the domain where the model is defined.
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("time {t} outside valid range [{lo}, {hi}]")]
    Range { t: f64, lo: f64, hi: f64 },

    /// The expected count never dropped below the baseline; extend the horizon.
    #[error("expected count stays above baseline through horizon {horizon} weeks")]
    HorizonExceeded { horizon: u32 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("input format error: {0}")]
    Format(String),

    #[error("degenerate data: {0}")]
    DegenerateFit(String),

    #[error("optimizer did not converge after {evaluations} evaluations (best log-likelihood {best_log_likelihood})")]
    Convergence {
        best: Box<FullParams>,
        best_log_likelihood: f64,
        evaluations: usize,
    },

    #[error("initial state has zero posterior density")]
    InvalidStart,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
