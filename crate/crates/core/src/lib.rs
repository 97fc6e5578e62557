//! Parameter-free alternating gradient projection for smooth minimax problems
//! `min_{x∈X} max_{y∈Y} f(x, y)`.
//!
//! The solvers estimate the smoothness constants (and, in the strongly
//! concave case, the concavity modulus) by backtracking, so no Lipschitz
//! constant has to be supplied. Everything is generic over [`Scalar`]
//! (`f64` or `f32`); the aliases below fix the common `f64` case.
//!
//! ```
//! use pfagp::{problems, SolverConfig, Status};
//!
//! let problem = problems::make_dirac_gan::<f64>().unwrap();
//! let config = SolverConfig::new(vec![1.0], vec![1.0]).with_epsilon(1e-4);
//! let result = pfagp::pf_agp_nc(&problem, &config).unwrap();
//! assert_eq!(result.status, Status::Converged);
//! ```

// `!(v > 0)` is deliberate throughout: it rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backtracking;
pub mod error;
pub mod problem;
pub mod problems;
pub mod projections;
pub mod scalar;
pub mod solvers;
pub mod trace;
pub mod vector;

pub use error::{Error, Result};
pub use problem::{
    check_gradients, regularized_gap, stationarity_gap, FnObjective, GradientCheckReport, KnownConstants,
    MinimaxProblem, Objective, StationarityGap,
};
pub use projections::{project_simplex, FeasibleSet};
pub use scalar::Scalar;
pub use solvers::{
    agp_baseline, best_response, inner_max_from_gradient, inner_max_regularized, pf_agp_nc, pf_agp_nl, pf_agp_nsc,
    r_pf_agp_nsc, AgpSchedule, Diagnostics, InitialEstimates, NcBetaRule, RestartParams, Solver, SolverConfig,
    SolverResult, StageRecord, Status, StepRule, StepSchedule, Termination, TraceRecord,
};
pub use trace::{read_trace, write_trace, TraceFormat, TRACE_COLUMNS};

pub type Problem = MinimaxProblem<f64>;
pub type Config = SolverConfig<f64>;
pub type Outcome = SolverResult<f64>;
pub type Record = TraceRecord<f64>;
pub type Set = FeasibleSet<f64>;
pub type Gap = StationarityGap<f64>;

pub type Problem32 = MinimaxProblem<f32>;
pub type Config32 = SolverConfig<f32>;
pub type Outcome32 = SolverResult<f32>;
pub type Record32 = TraceRecord<f32>;
pub type Set32 = FeasibleSet<f32>;
