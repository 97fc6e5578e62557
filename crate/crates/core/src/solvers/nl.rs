use crate::backtracking::{c1, c2, condition_tolerance, ConditionValues, EstimateState};
use crate::error::{Error, Result};
use crate::problem::MinimaxProblem;
use crate::projections::FeasibleSet;
use crate::scalar::Scalar;
use crate::vector;

use super::{prepare, projected_step, Finish, Run, SolverConfig, SolverResult, Status, StepFields, StepRule};

/// `argmax_{y∈Y} ⟨g, y⟩ − (c/2)‖y‖² − (d/2)‖y − y_k‖² = P_Y((g + d y_k)/(c + d))`.
pub fn inner_max_from_gradient<T: Scalar>(set_y: &FeasibleSet<T>, g: &[T], y_k: &[T], c: T, d: T) -> Result<Vec<T>> {
    if !(c >= T::zero() && d >= T::zero()) || !(c + d > T::zero()) || !(c + d).is_finite() {
        return Err(Error::Parameter(format!("need c, d ≥ 0 and c + d > 0, got c = {c}, d = {d}")));
    }
    if g.len() != y_k.len() {
        return Err(Error::Shape {
            context: "inner maximization gradient",
            expected: y_k.len(),
            got: g.len(),
        });
    }
    let target: Vec<T> = g.iter().zip(y_k).map(|(&gi, &yi)| (gi + d * yi) / (c + d)).collect();
    set_y.project(&target)
}

/// Exact maximizer of `f(x, ·) − (c/2)‖·‖² − (d/2)‖· − y_k‖²` over `Y` for a
/// problem linear in `y`.
pub fn inner_max_regularized<T: Scalar>(problem: &MinimaxProblem<T>, x: &[T], y_k: &[T], c: T, d: T) -> Result<Vec<T>> {
    if !problem.linear_in_y() {
        return Err(Error::Structure(format!("problem '{}' is not marked linear in y", problem.name())));
    }
    problem.check_point(x, y_k)?;
    let g = problem.grad_y(x, y_k);
    if !vector::all_finite(&g) {
        return Err(crate::problem::numeric_error("grad_y", x, y_k));
    }
    inner_max_from_gradient(problem.set_y(), &g, y_k, c, d)
}

#[derive(Clone, Copy)]
struct Steps<T> {
    rho: T,
    beta: T,
    c: T,
    d: T,
}

/// `ρ = 2 max(l11, l12)`, `β = 2ρk^{1/3} + ρ`, `c = ρ/k^{1/3}`, `d = ρ/(16 k^{1/3})`.
fn step_sizes<T: Scalar>(est: &EstimateState<T>, k: usize) -> Steps<T> {
    let rho = T::lit(2.0) * est.l11.max(est.l12);
    let k3 = T::count(k).cbrt();
    Steps {
        rho,
        beta: T::lit(2.0) * rho * k3 + rho,
        c: rho / k3,
        d: rho / (T::lit(16.0) * k3),
    }
}

/// Parameter-free alternating gradient projection for nonconvex–linear
/// problems.
///
/// The y-update maximizes the regularized objective in closed form, so only
/// `l11` and `l12` are backtracked (`C1`, `C2`). Gaps use `β` for `x` and `ρ`
/// for `y`; the regularized gap uses the current `c`.
pub fn pf_agp_nl<T: Scalar>(problem: &MinimaxProblem<T>, config: &SolverConfig<T>) -> Result<SolverResult<T>> {
    if !problem.linear_in_y() {
        return Err(Error::Structure(format!(
            "pf-agp-nl needs a problem linear in y; '{}' is not",
            problem.name()
        )));
    }
    let (x, y) = prepare(problem, config, true)?;
    let mut run = Run::new(problem, config, &x, &y);
    let outcome = iterate(&mut run, x, y);
    Ok(run.finish(outcome))
}

fn iterate<T: Scalar>(run: &mut Run<'_, T>, mut x: Vec<T>, mut y: Vec<T>) -> Result<Finish<T>> {
    let cfg = run.config;
    let (set_x, set_y) = (run.problem.set_x(), run.problem.set_y());
    let init = cfg.initial;
    let mut est = EstimateState::new(init.l11, init.l12, init.l22, init.mu);
    let mut s = step_sizes(&est, 1);

    let fields = |est: &EstimateState<T>, s: Steps<T>| StepFields {
        l11: Some(est.l11),
        l12: Some(est.l12),
        beta: Some(s.beta),
        gamma: Some(s.rho),
        c: Some(s.c),
        d: Some(s.d),
        ..Default::default()
    };

    for k in 1.. {
        let at = run.eval_point(&x, &y)?;
        if cfg.step_rule == StepRule::EveryTrial || k == 1 {
            s = step_sizes(&est, k);
        }
        let gaps = run.gaps(&x, &y, &at, s.beta, s.rho, Some(s.c))?;
        if gaps.converged(cfg.epsilon) || k > cfg.max_outer_iters {
            run.record(k, 0, at.f, &gaps, fields(&est, s), true);
            let status = if gaps.converged(cfg.epsilon) { Status::Converged } else { Status::MaxIters };
            return Ok(Finish::new(status, x, y, gaps.tested));
        }

        let tol = condition_tolerance(at.f);
        est.trial = 0;
        let mut accepted = None;
        while est.trial < cfg.max_trials {
            let x_t = projected_step(set_x, &x, -s.beta.recip(), &at.grad_x)?;
            let gy_t = run.oracle.grad_y(&x_t, &y)?;
            let y_t = inner_max_from_gradient(set_y, &gy_t, &y, s.c, s.d)?;
            let f_t = run.oracle.value(&x_t, &y)?;

            let mut conds = ConditionValues::new(x_t, y_t);
            conds.c1 = Some(c1(f_t, at.f, &at.grad_x, &x, &conds.x_trial, est.l11));
            conds.c2 = Some(c2(&gy_t, &at.grad_y, &x, &conds.x_trial, est.l12));
            let ok = conds.all_satisfied(tol);
            est.apply(&conds, tol);
            if ok {
                accepted = Some(conds);
                break;
            }
            s = step_sizes(&est, k);
        }
        run.diagnostics.doublings = est.doublings;

        let Some(conds) = accepted else {
            run.record(k, est.trial, at.f, &gaps, fields(&est, s), true);
            let mut finish = Finish::new(Status::Stalled, x, y, gaps.tested);
            finish.error = Some(Error::Stalled {
                iteration: k,
                trials: est.trial,
            });
            return Ok(finish);
        };

        // β − l11/2 − l12²/c ≥ ρ²/c
        let lhs = s.beta - est.l11 / T::lit(2.0) - est.l12 * est.l12 / s.c;
        let rhs = s.rho * s.rho / s.c;
        if lhs < rhs * (T::one() - T::condition_slack()) {
            run.diagnostics.beta_bound_violations += 1;
        }

        run.record(k, est.trial, at.f, &gaps, fields(&est, s), false);
        run.iterations = k;
        x = conds.x_trial;
        y = conds.y_trial;
    }
    unreachable!("outer loop exits through convergence or the iteration cap")
}
