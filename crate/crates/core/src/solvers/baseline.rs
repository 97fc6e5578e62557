use crate::error::{Error, Result};
use crate::problem::{regularize_grad_y, MinimaxProblem};
use crate::scalar::Scalar;

use super::{prepare, projected_step, Finish, Run, SolverConfig, SolverResult, Status, StepFields};

/// `scale / (offset + k^power)`; a constant when `power == 0` and `offset == 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule<T> {
    pub scale: T,
    pub offset: T,
    pub power: T,
}

impl<T: Scalar> StepSchedule<T> {
    pub fn constant(v: T) -> Self {
        StepSchedule {
            scale: v,
            offset: T::zero(),
            power: T::zero(),
        }
    }

    pub fn new(scale: T, offset: T, power: T) -> Self {
        StepSchedule { scale, offset, power }
    }

    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    pub fn at(&self, k: usize) -> T {
        if self.power == T::zero() && self.offset == T::zero() {
            return self.scale;
        }
        self.scale / (self.offset + T::count(k).powf(self.power))
    }
}

/// Step sizes of the fixed-step baseline: `x ← P_X(x − α_x ∇_x f)`,
/// `y ← P_Y(y + β_y (∇_y f − c y))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgpSchedule<T> {
    pub x_step: StepSchedule<T>,
    pub y_step: StepSchedule<T>,
    pub reg: StepSchedule<T>,
}

impl<T: Scalar> AgpSchedule<T> {
    /// `α_x = 0.8/√k`, `β_y = 0.3`, `c_k = 0.5/k^{1/4}`.
    pub fn dirac_gan() -> Self {
        AgpSchedule {
            x_step: StepSchedule::new(T::lit(0.8), T::zero(), T::lit(0.5)),
            y_step: StepSchedule::constant(T::lit(0.3)),
            reg: StepSchedule::new(T::lit(0.5), T::zero(), T::lit(0.25)),
        }
    }

    /// `α_x = 0.14`, `β_y = 1.1`, no regularization.
    pub fn synthetic() -> Self {
        AgpSchedule {
            x_step: StepSchedule::constant(T::lit(0.14)),
            y_step: StepSchedule::constant(T::lit(1.1)),
            reg: StepSchedule::zero(),
        }
    }

    /// `1/β = 2/(2 + √k)`, `1/γ = 1/100`, `c = 1/(10 + k^{1/4})`.
    pub fn robust() -> Self {
        AgpSchedule {
            x_step: StepSchedule::new(T::lit(2.0), T::lit(2.0), T::lit(0.5)),
            y_step: StepSchedule::constant(T::lit(0.01)),
            reg: StepSchedule::new(T::one(), T::lit(10.0), T::lit(0.25)),
        }
    }
}

/// Fixed-step alternating gradient projection: `x` first, then `y` on the
/// regularized objective at the new `x`. No backtracking; `Y` may be
/// unbounded. Gaps use `β = 1/α_x` and `γ = 1/β_y`.
pub fn agp_baseline<T: Scalar>(
    problem: &MinimaxProblem<T>,
    config: &SolverConfig<T>,
    schedule: &AgpSchedule<T>,
) -> Result<SolverResult<T>> {
    let (x, y) = prepare(problem, config, false)?;
    let mut run = Run::new(problem, config, &x, &y);
    let outcome = iterate(&mut run, x, y, schedule);
    Ok(run.finish(outcome))
}

fn iterate<T: Scalar>(run: &mut Run<'_, T>, mut x: Vec<T>, mut y: Vec<T>, sched: &AgpSchedule<T>) -> Result<Finish<T>> {
    let cfg = run.config;
    let (set_x, set_y) = (run.problem.set_x(), run.problem.set_y());
    for k in 1.. {
        let (ax, by, c) = (sched.x_step.at(k), sched.y_step.at(k), sched.reg.at(k));
        if !(ax > T::zero() && by > T::zero() && c >= T::zero()) || !(ax.is_finite() && by.is_finite() && c.is_finite()) {
            return Err(Error::Parameter(format!(
                "step schedule gives alpha_x = {ax}, beta_y = {by}, c = {c} at k = {k}"
            )));
        }
        let (beta, gamma) = (ax.recip(), by.recip());
        let at = run.eval_point(&x, &y)?;
        let reg = (c > T::zero()).then_some(c);
        let gaps = run.gaps(&x, &y, &at, beta, gamma, reg)?;
        let fields = StepFields {
            beta: Some(beta),
            gamma: Some(gamma),
            c: reg,
            ..Default::default()
        };
        if gaps.converged(cfg.epsilon) || k > cfg.max_outer_iters {
            run.record(k, 0, at.f, &gaps, fields, true);
            let status = if gaps.converged(cfg.epsilon) { Status::Converged } else { Status::MaxIters };
            return Ok(Finish::new(status, x, y, gaps.tested));
        }
        let x_next = projected_step(set_x, &x, -ax, &at.grad_x)?;
        let gy = run.oracle.grad_y(&x_next, &y)?;
        let y_next = projected_step(set_y, &y, by, &regularize_grad_y(&gy, &y, c))?;
        run.record(k, 1, at.f, &gaps, fields, false);
        run.iterations = k;
        x = x_next;
        y = y_next;
    }
    unreachable!("outer loop exits through convergence or the iteration cap")
}
