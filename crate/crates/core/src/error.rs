use thiserror::Error;

/// Errors raised by problems, projections and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    Shape {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("point is not feasible for {set}: {detail}")]
    Infeasible { set: String, detail: String },

    #[error("non-finite {what} at x = {x:?}, y = {y:?}")]
    Numeric {
        what: String,
        x: Vec<f64>,
        y: Vec<f64>,
    },

    #[error("problem structure not supported by solver: {0}")]
    Structure(String),

    #[error("solver requires a bounded Y, but {0} is unbounded")]
    UnboundedY(String),

    #[error("backtracking stalled at outer iteration {iteration} after {trials} trials")]
    Stalled { iteration: usize, trials: usize },

    #[error("data error: {0}")]
    Data(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
