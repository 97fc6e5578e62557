//! Parameter-free alternating gradient projection solvers.
//!
//! | solver | problem class | backtracked estimates |
//! |---|---|---|
//! | [`pf_agp_nsc`] | nonconvex–strongly concave | `l11`, `l12`, `l22`, `mu` |
//! | [`pf_agp_nc`] | nonconvex–concave | `l11`, `l12`, `l22` |
//! | [`pf_agp_nl`] | nonconvex–linear | `l11`, `l12` |
//! | [`r_pf_agp_nsc`] | nonconvex–strongly concave, known `mu` | global `l`, by restarts |
//! | [`agp_baseline`] | any | none (fixed schedule) |
//!
//! Every solver checks termination at `(x_k, y_k)` before stepping, so an
//! already-stationary start returns at `k = 1` without moving.

mod baseline;
mod nc;
mod nl;
mod nsc;
mod restart;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

pub use baseline::{agp_baseline, AgpSchedule, StepSchedule};
pub use nc::pf_agp_nc;
pub use nl::{inner_max_from_gradient, inner_max_regularized, pf_agp_nl};
pub use nsc::pf_agp_nsc;
pub use restart::{best_response, r_pf_agp_nsc, StageRecord};

use crate::error::{Error, Result};
use crate::problem::{
    gap_from_gradients, regularize_grad_y, CountingOracle, MinimaxProblem, StationarityGap,
};
use crate::scalar::Scalar;
use crate::vector;

/// Starting values of the backtracked estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialEstimates<T> {
    pub l11: T,
    pub l12: T,
    pub l22: T,
    pub mu: T,
}

impl<T: Scalar> InitialEstimates<T> {
    pub fn uniform(l: T, mu: T) -> Self {
        InitialEstimates { l11: l, l12: l, l22: l, mu }
    }
}

/// Quantity compared against `epsilon` at each outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Projected-gradient gap with the iteration's `β`, `γ`.
    StationarityGap,
    /// `‖(∇_x f, ∇_y f)‖`; equals the gap for interior iterates.
    GradientNorm,
    /// Gap of the regularized `f − (c/2)‖y‖²`; falls back to the plain gap
    /// for solvers without a regularizer.
    RegularizedGap,
}

impl FromStr for Termination {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gap" | "stationarity-gap" => Ok(Termination::StationarityGap),
            "grad" | "gradient-norm" => Ok(Termination::GradientNorm),
            "reg-gap" | "regularized-gap" => Ok(Termination::RegularizedGap),
            _ => Err(Error::Parameter(format!("unknown termination rule '{s}'"))),
        }
    }
}

/// When the step quantities `β`, `γ`, `c`, `d` are recomputed from the
/// current estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// At every trial, including the first of each outer iteration.
    EveryTrial,
    /// Only after a failed trial; the first trial reuses the previous
    /// iteration's accepted values.
    AfterFailure,
}

/// Denominator of the second `β` term in the nonconvex–concave solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcBetaRule {
    /// `2 l12² √k / l22_prev`.
    Theorem,
    /// `2 l12² √k / l12_prev`.
    Algorithm,
}

/// Extra inputs of the restarted solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestartParams<T> {
    /// True strong-concavity modulus.
    pub mu: T,
    /// Lower bound on `min_x max_y f`.
    pub s_lower: T,
    /// Initial global smoothness estimate; defaults to the `l11` estimate.
    pub l1: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub epsilon: T,
    pub max_outer_iters: usize,
    pub initial: InitialEstimates<T>,
    pub x0: Vec<T>,
    pub y0: Vec<T>,
    pub trace_every: usize,
    pub termination: Termination,
    pub step_rule: StepRule,
    pub nc_beta: NcBetaRule,
    /// Backtracking trials allowed per outer iteration.
    pub max_trials: usize,
    pub restart: Option<RestartParams<T>>,
    /// Fill `elapsed_ms` in trace records. Off by default so that traces are
    /// bitwise reproducible.
    pub record_timing: bool,
}

impl<T: Scalar> SolverConfig<T> {
    pub fn new(x0: Vec<T>, y0: Vec<T>) -> Self {
        SolverConfig {
            epsilon: T::lit(1e-5),
            max_outer_iters: 1_000_000,
            initial: InitialEstimates::uniform(T::lit(0.01), T::lit(0.01)),
            x0,
            y0,
            trace_every: 1,
            termination: Termination::StationarityGap,
            step_rule: StepRule::EveryTrial,
            nc_beta: NcBetaRule::Theorem,
            max_trials: 200,
            restart: None,
            record_timing: false,
        }
    }

    pub fn with_epsilon(mut self, eps: T) -> Self {
        self.epsilon = eps;
        self
    }
    pub fn with_max_outer_iters(mut self, n: usize) -> Self {
        self.max_outer_iters = n;
        self
    }
    pub fn with_initial(mut self, initial: InitialEstimates<T>) -> Self {
        self.initial = initial;
        self
    }
    pub fn with_trace_every(mut self, n: usize) -> Self {
        self.trace_every = n;
        self
    }
    pub fn with_termination(mut self, t: Termination) -> Self {
        self.termination = t;
        self
    }
    pub fn with_step_rule(mut self, r: StepRule) -> Self {
        self.step_rule = r;
        self
    }
    pub fn with_nc_beta(mut self, r: NcBetaRule) -> Self {
        self.nc_beta = r;
        self
    }
    pub fn with_restart(mut self, r: RestartParams<T>) -> Self {
        self.restart = Some(r);
        self
    }
    pub fn with_timing(mut self, on: bool) -> Self {
        self.record_timing = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Parameter(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("epsilon", self.epsilon)?;
        positive("initial l11", self.initial.l11)?;
        positive("initial l12", self.initial.l12)?;
        positive("initial l22", self.initial.l22)?;
        positive("initial mu", self.initial.mu)?;
        if self.max_outer_iters == 0 {
            return Err(Error::Parameter("max_outer_iters must be positive".into()));
        }
        if self.trace_every == 0 {
            return Err(Error::Parameter("trace_every must be positive".into()));
        }
        if self.max_trials == 0 {
            return Err(Error::Parameter("max_trials must be positive".into()));
        }
        Ok(())
    }
}

/// Metrics of one outer iteration. Fields that don't apply to a solver are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord<T> {
    pub k: usize,
    /// Cumulative gradient-oracle evaluations.
    pub grad_calls: u64,
    /// Cumulative value-oracle evaluations.
    pub f_calls: u64,
    /// Backtracking trials spent in this iteration.
    pub trials: usize,
    pub l11: Option<T>,
    pub l12: Option<T>,
    pub l22: Option<T>,
    pub mu: Option<T>,
    /// x-step parameter (the step is `1/β`).
    pub beta: Option<T>,
    /// y-step parameter (the step is `1/γ`).
    pub gamma: Option<T>,
    pub c: Option<T>,
    pub d: Option<T>,
    /// `f(x_k, y_k)`.
    pub f_value: T,
    pub gap_norm: T,
    pub gap_x_norm: T,
    pub gap_y_norm: T,
    pub reg_gap_norm: Option<T>,
    pub elapsed_ms: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIters,
    Stalled,
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::MaxIters => "max_iters",
            Status::Stalled => "stalled",
            Status::Error => "error",
        })
    }
}

/// Run-level counters for the invariants the solvers assert.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Doublings of `l11`, `l12`, `l22`.
    pub doublings: [u64; 3],
    pub mu_halvings: u64,
    /// Accepted iterations where `f(x_{k+1}, y_k) − f(x_k, y_k) ≤ −(β − l11/2)‖Δx‖²`
    /// failed by more than the condition slack.
    pub descent_violations: u64,
    /// Iterations where `γ_k < γ_{k−1}`.
    pub gamma_decreases: u64,
    /// Iterations where `β − l11/2 − l12²/c ≥ ρ²/c` failed.
    pub beta_bound_violations: u64,
    pub restarts: u64,
    /// Gradient calls spent inside the best-response sub-solver.
    pub sub_solver_grad_calls: u64,
    /// Value calls spent inside the best-response sub-solver.
    pub sub_solver_f_calls: u64,
}

#[derive(Debug, Clone)]
pub struct SolverResult<T> {
    pub status: Status,
    pub x: Vec<T>,
    pub y: Vec<T>,
    /// The gap that was tested against `epsilon` at the returned point.
    pub gap: StationarityGap<T>,
    /// Outer iterations (steps) taken.
    pub iterations: usize,
    pub grad_calls: u64,
    pub f_calls: u64,
    pub trace: Vec<TraceRecord<T>>,
    pub diagnostics: Diagnostics,
    /// Stage parameters of the restarted solver; empty otherwise.
    pub stages: Vec<StageRecord<T>>,
    pub error: Option<Error>,
    pub elapsed_ms: f64,
}

impl<T: Scalar> SolverResult<T> {
    /// Running minimum of the recorded gap norms.
    pub fn min_gap_so_far(&self) -> Vec<(usize, T)> {
        let mut best = T::infinity();
        self.trace
            .iter()
            .map(|r| {
                best = best.min(r.gap_norm);
                (r.k, best)
            })
            .collect()
    }
}

/// Solver selection, with the fixed schedule for the baseline.
#[derive(Debug, Clone, PartialEq)]
pub enum Solver<T> {
    PfAgpNsc,
    PfAgpNc,
    PfAgpNl,
    RPfAgpNsc,
    AgpBaseline(AgpSchedule<T>),
}

impl<T: Scalar> Solver<T> {
    pub const NAMES: [&'static str; 5] = ["pf-agp-nsc", "pf-agp-nc", "pf-agp-nl", "rpf-agp-nsc", "agp"];

    pub fn name(&self) -> &'static str {
        match self {
            Solver::PfAgpNsc => "pf-agp-nsc",
            Solver::PfAgpNc => "pf-agp-nc",
            Solver::PfAgpNl => "pf-agp-nl",
            Solver::RPfAgpNsc => "rpf-agp-nsc",
            Solver::AgpBaseline(_) => "agp",
        }
    }

    pub fn run(&self, problem: &MinimaxProblem<T>, config: &SolverConfig<T>) -> Result<SolverResult<T>> {
        match self {
            Solver::PfAgpNsc => pf_agp_nsc(problem, config),
            Solver::PfAgpNc => pf_agp_nc(problem, config),
            Solver::PfAgpNl => pf_agp_nl(problem, config),
            Solver::RPfAgpNsc => r_pf_agp_nsc(problem, config),
            Solver::AgpBaseline(s) => agp_baseline(problem, config, s),
        }
    }
}

/// Validates inputs and projects the initial point onto `X × Y`.
pub(crate) fn prepare<T: Scalar>(
    problem: &MinimaxProblem<T>,
    config: &SolverConfig<T>,
    needs_bounded_y: bool,
) -> Result<(Vec<T>, Vec<T>)> {
    config.validate()?;
    problem.check_point(&config.x0, &config.y0)?;
    if needs_bounded_y && !problem.set_y().is_bounded() {
        return Err(Error::UnboundedY(problem.set_y().to_string()));
    }
    if !vector::all_finite(&config.x0) || !vector::all_finite(&config.y0) {
        return Err(Error::Parameter("initial point must be finite".into()));
    }
    let x = problem.set_x().project(&config.x0)?;
    let y = problem.set_y().project(&config.y0)?;
    Ok((x, y))
}

/// How a solver loop ended.
pub(crate) struct Finish<T> {
    pub status: Status,
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub gap: StationarityGap<T>,
    pub error: Option<Error>,
}

impl<T> Finish<T> {
    pub fn new(status: Status, x: Vec<T>, y: Vec<T>, gap: StationarityGap<T>) -> Self {
        Finish { status, x, y, gap, error: None }
    }
}

/// Gradients and value at the current iterate.
pub(crate) struct PointEval<T> {
    pub grad_x: Vec<T>,
    pub grad_y: Vec<T>,
    pub f: T,
}

/// Gaps evaluated at the current iterate, before stepping.
pub(crate) struct GapCheck<T> {
    pub plain: StationarityGap<T>,
    pub regularized: Option<StationarityGap<T>>,
    pub tested: StationarityGap<T>,
}

impl<T: Scalar> GapCheck<T> {
    pub fn converged(&self, eps: T) -> bool {
        self.tested.norm <= eps
    }
}

/// Step fields of a trace record.
#[derive(Clone, Copy)]
pub(crate) struct StepFields<T> {
    pub l11: Option<T>,
    pub l12: Option<T>,
    pub l22: Option<T>,
    pub mu: Option<T>,
    pub beta: Option<T>,
    pub gamma: Option<T>,
    pub c: Option<T>,
    pub d: Option<T>,
}

impl<T> Default for StepFields<T> {
    fn default() -> Self {
        StepFields {
            l11: None,
            l12: None,
            l22: None,
            mu: None,
            beta: None,
            gamma: None,
            c: None,
            d: None,
        }
    }
}

/// Shared bookkeeping of one solver run: oracle counters, trace, diagnostics.
pub(crate) struct Run<'a, T: Scalar> {
    pub problem: &'a MinimaxProblem<T>,
    pub config: &'a SolverConfig<T>,
    pub oracle: CountingOracle<'a, T>,
    pub trace: Vec<TraceRecord<T>>,
    pub diagnostics: Diagnostics,
    pub stages: Vec<StageRecord<T>>,
    pub iterations: usize,
    last_x: Vec<T>,
    last_y: Vec<T>,
    start: Instant,
}

impl<'a, T: Scalar> Run<'a, T> {
    pub fn new(problem: &'a MinimaxProblem<T>, config: &'a SolverConfig<T>, x: &[T], y: &[T]) -> Self {
        Run {
            problem,
            config,
            oracle: CountingOracle::new(problem),
            trace: Vec::new(),
            diagnostics: Diagnostics::default(),
            stages: Vec::new(),
            iterations: 0,
            last_x: x.to_vec(),
            last_y: y.to_vec(),
            start: Instant::now(),
        }
    }

    pub fn eval_point(&mut self, x: &[T], y: &[T]) -> Result<PointEval<T>> {
        self.last_x = x.to_vec();
        self.last_y = y.to_vec();
        Ok(PointEval {
            grad_x: self.oracle.grad_x(x, y)?,
            grad_y: self.oracle.grad_y(x, y)?,
            f: self.oracle.value(x, y)?,
        })
    }

    /// Plain gap with `(β, γ)`, the regularized gap when `c` is given, and
    /// the one selected by the termination rule.
    pub fn gaps(&self, x: &[T], y: &[T], at: &PointEval<T>, beta: T, gamma: T, c: Option<T>) -> Result<GapCheck<T>> {
        let (sx, sy) = (self.problem.set_x(), self.problem.set_y());
        let plain = gap_from_gradients(sx, sy, x, &at.grad_x, y, &at.grad_y, beta, gamma)?;
        let regularized = match c {
            Some(c) => {
                let gy = regularize_grad_y(&at.grad_y, y, c);
                Some(gap_from_gradients(sx, sy, x, &at.grad_x, y, &gy, beta, gamma)?)
            }
            None => None,
        };
        let tested = match self.config.termination {
            Termination::StationarityGap => plain.clone(),
            Termination::GradientNorm => StationarityGap {
                gap_x: at.grad_x.clone(),
                gap_y: at.grad_y.clone(),
                norm: vector::joint_norm(&at.grad_x, &at.grad_y),
            },
            Termination::RegularizedGap => regularized.clone().unwrap_or_else(|| plain.clone()),
        };
        Ok(GapCheck { plain, regularized, tested })
    }

    /// Appends a trace record if `k` falls on the trace stride or `force` is set.
    pub fn record(&mut self, k: usize, trials: usize, f_value: T, gaps: &GapCheck<T>, step: StepFields<T>, force: bool) {
        if !(force || k == 1 || k.is_multiple_of(self.config.trace_every)) {
            return;
        }
        let elapsed_ms = self
            .config
            .record_timing
            .then(|| self.start.elapsed().as_secs_f64() * 1e3);
        self.trace.push(TraceRecord {
            k,
            grad_calls: self.oracle.grad_calls() + self.diagnostics.sub_solver_grad_calls,
            f_calls: self.oracle.f_calls() + self.diagnostics.sub_solver_f_calls,
            trials,
            l11: step.l11,
            l12: step.l12,
            l22: step.l22,
            mu: step.mu,
            beta: step.beta,
            gamma: step.gamma,
            c: step.c,
            d: step.d,
            f_value,
            gap_norm: gaps.plain.norm,
            gap_x_norm: gaps.plain.norm_x(),
            gap_y_norm: gaps.plain.norm_y(),
            reg_gap_norm: gaps.regularized.as_ref().map(|g| g.norm),
            elapsed_ms,
        });
    }

    pub fn finish(self, outcome: Result<Finish<T>>) -> SolverResult<T> {
        let elapsed_ms = self.start.elapsed().as_secs_f64() * 1e3;
        let grad_calls = self.oracle.grad_calls() + self.diagnostics.sub_solver_grad_calls;
        let f_calls = self.oracle.f_calls() + self.diagnostics.sub_solver_f_calls;
        let (status, x, y, gap, error) = match outcome {
            Ok(f) => (f.status, f.x, f.y, f.gap, f.error),
            Err(e) => {
                let n = (self.last_x.len(), self.last_y.len());
                let gap = StationarityGap {
                    gap_x: vec![T::nan(); n.0],
                    gap_y: vec![T::nan(); n.1],
                    norm: T::nan(),
                };
                (Status::Error, self.last_x, self.last_y, gap, Some(e))
            }
        };
        SolverResult {
            status,
            x,
            y,
            gap,
            iterations: self.iterations,
            grad_calls,
            f_calls,
            trace: self.trace,
            diagnostics: self.diagnostics,
            stages: self.stages,
            error,
            elapsed_ms,
        }
    }
}

/// Gradient step `P_S(v + s·g)`.
#[inline]
pub(crate) fn projected_step<T: Scalar>(
    set: &crate::projections::FeasibleSet<T>,
    v: &[T],
    s: T,
    g: &[T],
) -> Result<Vec<T>> {
    set.project(&vector::axpy(v, s, g))
}
