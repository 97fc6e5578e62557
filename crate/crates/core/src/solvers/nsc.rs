use crate::backtracking::{c1, c2, c3, c4, condition_tolerance, ConditionValues, EstimateState};
use crate::error::{Error, Result};
use crate::problem::MinimaxProblem;
use crate::scalar::Scalar;
use crate::vector;

use super::{prepare, projected_step, Finish, Run, SolverConfig, SolverResult, Status, StepFields, StepRule};

/// Accepted estimates of the previous outer iteration.
#[derive(Clone, Copy)]
struct Previous<T> {
    l12: T,
    l22: T,
    mu: T,
}

/// `β = l11 + l12 + 32 l12² (l12' + l22') / (μ μ')`, `γ = l12 + l22`, where
/// primes denote the previous iteration's accepted estimates.
fn step_sizes<T: Scalar>(est: &EstimateState<T>, prev: Previous<T>) -> (T, T) {
    let beta = est.l11
        + est.l12
        + T::lit(32.0) * est.l12 * est.l12 * (prev.l12 + prev.l22) / (est.mu * prev.mu);
    let gamma = est.l12 + est.l22;
    (beta, gamma)
}

/// Parameter-free alternating gradient projection for nonconvex–strongly
/// concave problems.
///
/// Each outer iteration takes trial steps
/// `x' = P_X(x_k − ∇_x f(x_k, y_k)/β)`, `y' = P_Y(y_k + ∇_y f(x', y_k)/γ)` and
/// accepts once `C1`–`C4` all hold; otherwise the violated estimates are
/// doubled (or `mu` halved) and `β`, `γ` recomputed. `Y` must be bounded.
pub fn pf_agp_nsc<T: Scalar>(problem: &MinimaxProblem<T>, config: &SolverConfig<T>) -> Result<SolverResult<T>> {
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
    let mut prev = Previous {
        l12: init.l12,
        l22: init.l22,
        mu: init.mu,
    };
    let (mut beta, mut gamma) = step_sizes(&est, prev);
    let mut last_gamma: Option<T> = None;

    for k in 1.. {
        let at = run.eval_point(&x, &y)?;
        if cfg.step_rule == StepRule::EveryTrial {
            (beta, gamma) = step_sizes(&est, prev);
        }
        let gaps = run.gaps(&x, &y, &at, beta, gamma, None)?;
        let fields = |est: &EstimateState<T>, beta, gamma| StepFields {
            l11: Some(est.l11),
            l12: Some(est.l12),
            l22: Some(est.l22),
            mu: Some(est.mu),
            beta: Some(beta),
            gamma: Some(gamma),
            ..Default::default()
        };
        if gaps.converged(cfg.epsilon) || k > cfg.max_outer_iters {
            run.record(k, 0, at.f, &gaps, fields(&est, beta, gamma), true);
            let status = if gaps.converged(cfg.epsilon) { Status::Converged } else { Status::MaxIters };
            return Ok(Finish::new(status, x, y, gaps.tested));
        }

        let tol = condition_tolerance(at.f);
        est.trial = 0;
        let mut accepted = None;
        while est.trial < cfg.max_trials {
            let x_t = projected_step(set_x, &x, -beta.recip(), &at.grad_x)?;
            let gy_t = run.oracle.grad_y(&x_t, &y)?;
            let y_t = projected_step(set_y, &y, gamma.recip(), &gy_t)?;
            let gy_tt = run.oracle.grad_y(&x_t, &y_t)?;
            let f_t = run.oracle.value(&x_t, &y)?;

            let mut conds = ConditionValues::new(x_t, y_t);
            conds.c1 = Some(c1(f_t, at.f, &at.grad_x, &x, &conds.x_trial, est.l11));
            conds.c2 = Some(c2(&gy_t, &at.grad_y, &x, &conds.x_trial, est.l12));
            conds.c3 = Some(c3(&gy_tt, &gy_t, &y, &conds.y_trial, est.l22));
            conds.c4 = Some(c4(&gy_tt, &gy_t, &y, &conds.y_trial, est.mu));
            let ok = conds.all_satisfied(tol);
            est.apply(&conds, tol);
            if ok {
                accepted = Some((conds, f_t));
                break;
            }
            (beta, gamma) = step_sizes(&est, prev);
        }
        run.diagnostics.doublings = est.doublings;
        run.diagnostics.mu_halvings = est.mu_halvings;

        let Some((conds, f_t)) = accepted else {
            run.record(k, est.trial, at.f, &gaps, fields(&est, beta, gamma), true);
            let mut finish = Finish::new(Status::Stalled, x, y, gaps.tested);
            finish.error = Some(Error::Stalled {
                iteration: k,
                trials: est.trial,
            });
            return Ok(finish);
        };

        // f(x_{k+1}, y_k) − f(x_k, y_k) ≤ −(β − l11/2)‖x_{k+1} − x_k‖²
        let dx2 = vector::norm_sq(&vector::sub(&conds.x_trial, &x));
        if f_t - at.f > -(beta - est.l11 / T::lit(2.0)) * dx2 + tol {
            run.diagnostics.descent_violations += 1;
        }
        if last_gamma.is_some_and(|g| gamma < g) {
            run.diagnostics.gamma_decreases += 1;
        }
        last_gamma = Some(gamma);

        run.record(k, est.trial, at.f, &gaps, fields(&est, beta, gamma), false);
        run.iterations = k;
        prev = Previous {
            l12: est.l12,
            l22: est.l22,
            mu: est.mu,
        };
        x = conds.x_trial;
        y = conds.y_trial;
    }
    unreachable!("outer loop exits through convergence or the iteration cap")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::FnObjective;
    use crate::projections::FeasibleSet;
    use crate::solvers::InitialEstimates;

    /// f = ½ q x² + b x y − (a/2) y² on a box.
    fn quad(q: f64, b: f64, a: f64) -> MinimaxProblem<f64> {
        MinimaxProblem::new(
            "quad1d",
            1,
            1,
            FnObjective::new(
                move |x: &[f64], y: &[f64]| 0.5 * q * x[0] * x[0] + b * x[0] * y[0] - 0.5 * a * y[0] * y[0],
                move |x: &[f64], y: &[f64]| vec![q * x[0] + b * y[0]],
                move |x: &[f64], y: &[f64]| vec![b * x[0] - a * y[0]],
            ),
        )
        .unwrap()
        .with_set_y(FeasibleSet::cube(1, 10.0).unwrap())
        .unwrap()
    }

    #[test]
    fn stationary_start_returns_immediately() {
        let p = quad(1.0, 1.0, 1.0);
        let cfg = SolverConfig::new(vec![0.0], vec![0.0]);
        let r = pf_agp_nsc(&p, &cfg).unwrap();
        assert_eq!(r.status, Status::Converged);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.x, vec![0.0]);
        assert_eq!(r.y, vec![0.0]);
        assert_eq!(r.trace.len(), 1);
    }

    #[test]
    fn converges_on_scalar_saddle() {
        let p = quad(-1.0, 2.0, 1.0);
        let cfg = SolverConfig::new(vec![1.0], vec![-1.0])
            .with_epsilon(1e-8)
            .with_initial(InitialEstimates::uniform(0.01, 1.0));
        let r = pf_agp_nsc(&p, &cfg).unwrap();
        assert_eq!(r.status, Status::Converged, "{:?}", r.error);
        assert!(r.x[0].abs() < 1e-6 && r.y[0].abs() < 1e-6);
        assert_eq!(r.diagnostics.descent_violations, 0);
        assert_eq!(r.diagnostics.gamma_decreases, 0);
    }

    #[test]
    fn unbounded_y_is_rejected() {
        let p = MinimaxProblem::new(
            "free",
            1,
            1,
            FnObjective::new(|_: &[f64], _: &[f64]| 0.0, |_, _| vec![0.0], |_, _| vec![0.0]),
        )
        .unwrap();
        let err = pf_agp_nsc(&p, &SolverConfig::new(vec![0.0], vec![0.0])).unwrap_err();
        assert!(matches!(err, Error::UnboundedY(_)));
    }

    #[test]
    fn max_iters_status() {
        let p = quad(-1.0, 2.0, 1.0);
        let cfg = SolverConfig::new(vec![1.0], vec![-1.0]).with_max_outer_iters(1);
        let r = pf_agp_nsc(&p, &cfg).unwrap();
        assert_eq!(r.status, Status::MaxIters);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.trace.len(), 2);
        assert_eq!(r.grad_calls, r.trace.last().unwrap().grad_calls);
    }

    #[test]
    fn trial_cap_reports_stall() {
        let p = quad(-1.0, 2.0, 1.0);
        let mut cfg = SolverConfig::new(vec![1.0], vec![-1.0])
            .with_initial(InitialEstimates::uniform(1e-6, 1.0));
        cfg.max_trials = 2;
        let r = pf_agp_nsc(&p, &cfg).unwrap();
        assert_eq!(r.status, Status::Stalled);
        assert!(matches!(r.error, Some(Error::Stalled { iteration: 1, trials: 2 })));
    }

    #[test]
    fn numeric_failure_keeps_trace() {
        let p = MinimaxProblem::new(
            "blowup",
            1,
            1,
            FnObjective::new(
                |x: &[f64], _: &[f64]| if x[0] < 0.5 { f64::NAN } else { x[0] * x[0] },
                |x: &[f64], _: &[f64]| vec![2.0 * x[0]],
                |_: &[f64], y: &[f64]| vec![-y[0]],
            ),
        )
        .unwrap()
        .with_set_y(FeasibleSet::cube(1, 1.0).unwrap())
        .unwrap();
        let r = pf_agp_nsc(&p, &SolverConfig::new(vec![1.0], vec![0.0])).unwrap();
        assert_eq!(r.status, Status::Error);
        assert!(matches!(r.error, Some(Error::Numeric { .. })));
    }
}
