use crate::backtracking::{c1, c2, c5, condition_tolerance, ConditionValues, EstimateState};
use crate::error::{Error, Result};
use crate::problem::{regularize_grad_y, MinimaxProblem};
use crate::scalar::Scalar;

use super::{
    prepare, projected_step, Finish, NcBetaRule, Run, SolverConfig, SolverResult, Status, StepFields, StepRule,
};

#[derive(Clone, Copy)]
struct Steps<T> {
    beta: T,
    gamma: T,
    c: T,
}

/// `γ = 20 l22`, `c = 19 l22 / k^{1/4}` and
/// `β = l12/(20 l22') + 2 l12² √k / q'` with `q' = l22'` (theorem form) or
/// `q' = l12'` (algorithm form); primes are the previous accepted estimates.
fn step_sizes<T: Scalar>(est: &EstimateState<T>, prev: (T, T), k: usize, rule: NcBetaRule) -> Steps<T> {
    let (prev_l12, prev_l22) = prev;
    let kf = T::count(k);
    let denom = match rule {
        NcBetaRule::Theorem => prev_l22,
        NcBetaRule::Algorithm => prev_l12,
    };
    let beta = est.l12 / (T::lit(20.0) * prev_l22) + T::lit(2.0) * est.l12 * est.l12 * kf.sqrt() / denom;
    Steps {
        beta,
        gamma: T::lit(20.0) * est.l22,
        c: T::lit(19.0) * est.l22 / kf.sqrt().sqrt(),
    }
}

/// Parameter-free alternating gradient projection for nonconvex–concave
/// problems.
///
/// The y-step ascends the regularized `f − (c_k/2)‖y‖²`; acceptance needs
/// `C1`, `C2` and `C5`. Termination follows `config.termination`; the trace
/// always carries both the plain and the regularized gap. `Y` must be bounded.
pub fn pf_agp_nc<T: Scalar>(problem: &MinimaxProblem<T>, config: &SolverConfig<T>) -> Result<SolverResult<T>> {
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
    let mut prev = (init.l12, init.l22);
    let mut s = step_sizes(&est, prev, 1, cfg.nc_beta);
    let mut last_gamma: Option<T> = None;

    let fields = |est: &EstimateState<T>, s: Steps<T>| StepFields {
        l11: Some(est.l11),
        l12: Some(est.l12),
        l22: Some(est.l22),
        beta: Some(s.beta),
        gamma: Some(s.gamma),
        c: Some(s.c),
        ..Default::default()
    };

    for k in 1.. {
        let at = run.eval_point(&x, &y)?;
        if cfg.step_rule == StepRule::EveryTrial || k == 1 {
            s = step_sizes(&est, prev, k, cfg.nc_beta);
        }
        let gaps = run.gaps(&x, &y, &at, s.beta, s.gamma, Some(s.c))?;
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
            let y_t = projected_step(set_y, &y, s.gamma.recip(), &regularize_grad_y(&gy_t, &y, s.c))?;
            let gy_tt = run.oracle.grad_y(&x_t, &y_t)?;
            let f_t = run.oracle.value(&x_t, &y)?;

            let mut conds = ConditionValues::new(x_t, y_t);
            conds.c1 = Some(c1(f_t, at.f, &at.grad_x, &x, &conds.x_trial, est.l11));
            conds.c2 = Some(c2(&gy_t, &at.grad_y, &x, &conds.x_trial, est.l12));
            conds.c5 = Some(c5(&gy_tt, &gy_t, &y, &conds.y_trial, est.l22, s.c));
            let ok = conds.all_satisfied(tol);
            est.apply(&conds, tol);
            if ok {
                accepted = Some(conds);
                break;
            }
            s = step_sizes(&est, prev, k, cfg.nc_beta);
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

        if last_gamma.is_some_and(|g| s.gamma < g) {
            run.diagnostics.gamma_decreases += 1;
        }
        last_gamma = Some(s.gamma);

        run.record(k, est.trial, at.f, &gaps, fields(&est, s), false);
        run.iterations = k;
        prev = (est.l12, est.l22);
        x = conds.x_trial;
        y = conds.y_trial;
    }
    unreachable!("outer loop exits through convergence or the iteration cap")
}
