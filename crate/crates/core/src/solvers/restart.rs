use crate::error::{Error, Result};
use crate::problem::{CountingOracle, MinimaxProblem};
use crate::scalar::Scalar;
use crate::vector;

use super::{prepare, projected_step, Finish, Run, SolverConfig, SolverResult, Status, StepFields};

/// Parameters of one restart stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord<T> {
    /// Stage index, starting at 1.
    pub stage: usize,
    /// Global smoothness estimate `l_i`.
    pub l: T,
    /// y-step parameter `3 l_i`.
    pub beta: T,
    /// x-step parameter `158 l_i³ / μ²`.
    pub alpha: T,
    pub eta: T,
    /// `d̃₁`; nonpositive when the stage cannot certify progress.
    pub d1: T,
    /// Inner-iteration budget `T̃ = (S₁ − S̲)/(ε² d̃₁)`; `≤ 0` skips the stage.
    pub t_budget: T,
    /// Inner iterations actually run.
    pub iterations: usize,
}

/// Output of [`best_response`].
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse<T> {
    pub y: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub grad_calls: u64,
    pub f_calls: u64,
}

const BEST_RESPONSE_TOL: f64 = 1e-8;
const BEST_RESPONSE_MAX_ITERS: usize = 1_000_000;

/// Approximates `max_{y∈Y} f(x, y)` by projected gradient ascent from `y0`.
///
/// The step is `1/L` with `L` doubled until
/// `f(x, y⁺) ≥ f(x, y) + ⟨∇_y f, y⁺ − y⟩ − (L/2)‖y⁺ − y‖²`; iteration stops
/// once `L‖y − P_Y(y + ∇_y f/L)‖ ≤ 1e-8`.
pub fn best_response<T: Scalar>(problem: &MinimaxProblem<T>, x: &[T], y0: &[T]) -> Result<BestResponse<T>> {
    problem.check_point(x, y0)?;
    let oracle = CountingOracle::new(problem);
    let set = problem.set_y();
    let tol = T::lit(BEST_RESPONSE_TOL);
    let mut y = set.project(y0)?;
    let mut f = oracle.value(x, &y)?;
    let mut l = T::one();
    let mut iterations = 0;
    loop {
        let g = oracle.grad_y(x, &y)?;
        if l * vector::dist(&y, &projected_step(set, &y, l.recip(), &g)?) <= tol {
            break;
        }
        if iterations >= BEST_RESPONSE_MAX_ITERS {
            return Err(Error::Stalled {
                iteration: iterations,
                trials: 0,
            });
        }
        let slack = T::condition_slack() * (T::one() + f.abs());
        let mut doublings = 0;
        let (y_next, f_next) = loop {
            let cand = projected_step(set, &y, l.recip(), &g)?;
            let f_cand = oracle.value(x, &cand)?;
            let d = vector::sub(&cand, &y);
            if f_cand >= f + vector::dot(&g, &d) - l / T::lit(2.0) * vector::norm_sq(&d) - slack {
                break (cand, f_cand);
            }
            l = l + l;
            doublings += 1;
            if doublings > 200 {
                return Err(Error::Stalled {
                    iteration: iterations,
                    trials: doublings,
                });
            }
        };
        y = y_next;
        f = f_next;
        iterations += 1;
    }
    Ok(BestResponse {
        y,
        value: f,
        iterations,
        grad_calls: oracle.grad_calls(),
        f_calls: oracle.f_calls(),
    })
}

impl<T: Scalar> StageRecord<T> {
    fn new(stage: usize, l: T, mu: T, s_gap: T, eps: T) -> Self {
        let two = T::lit(2.0);
        let three_halves = T::lit(1.5);
        let beta = T::lit(3.0) * l;
        let alpha = T::lit(158.0) * l.powi(3) / (mu * mu);
        let eta = (two * beta + mu) * (beta + l) / (mu * beta);
        let first = (alpha - l * (l + beta).powi(2) * eta * eta / (beta * beta) - l * l / mu - three_halves * l)
            / (two * alpha * alpha);
        let second = (beta - three_halves * l) / (beta * beta + two * l * l);
        let d1 = first.min(second);
        let t_budget = if d1 > T::zero() { s_gap / (eps * eps * d1) } else { T::zero() };
        StageRecord {
            stage,
            l,
            beta,
            alpha,
            eta,
            d1,
            t_budget,
            iterations: 0,
        }
    }
}

/// Restarted alternating gradient projection for nonconvex–strongly concave
/// problems with known `mu` and a lower bound `S̲` on `min_x max_y f`.
///
/// Stage `i` runs fixed steps `y ← P_Y(y + ∇_y f(x, y)/β_i)`,
/// `x ← P_X(x − ∇_x f(x, y)/α_i)` from the initial point for at most `T̃_i`
/// iterations, then restarts with `l_{i+1} = 2 l_i` unless the gap (with
/// `α_i`, `β_i`) is within `epsilon`. The gap is also checked before every
/// inner step, so a stage can stop early. `config.max_outer_iters` caps the
/// total inner iterations and `config.max_trials` the number of stages.
///
/// In the trace, `beta` holds `α_i`, `gamma` holds `β_i`, `l11 = l12 = l22 = l_i`
/// and `mu` the supplied modulus.
pub fn r_pf_agp_nsc<T: Scalar>(problem: &MinimaxProblem<T>, config: &SolverConfig<T>) -> Result<SolverResult<T>> {
    let params = config
        .restart
        .ok_or_else(|| Error::Parameter("rpf-agp-nsc needs the true mu and the lower bound S".into()))?;
    if !(params.mu > T::zero()) || !params.mu.is_finite() {
        return Err(Error::Parameter(format!("mu must be positive, got {}", params.mu)));
    }
    if !params.s_lower.is_finite() {
        return Err(Error::Parameter("S lower bound must be finite".into()));
    }
    let l1 = params.l1.unwrap_or(config.initial.l11);
    if !(l1 > T::zero()) || !l1.is_finite() {
        return Err(Error::Parameter(format!("initial l must be positive, got {l1}")));
    }
    let (x, y) = prepare(problem, config, true)?;
    let mut run = Run::new(problem, config, &x, &y);
    let outcome = iterate(&mut run, x, y, l1, params.mu, params.s_lower);
    Ok(run.finish(outcome))
}

fn iterate<T: Scalar>(run: &mut Run<'_, T>, x1: Vec<T>, y1: Vec<T>, l1: T, mu: T, s_lower: T) -> Result<Finish<T>> {
    let cfg = run.config;
    let (set_x, set_y) = (run.problem.set_x(), run.problem.set_y());

    let br = best_response(run.problem, &x1, &y1)?;
    run.diagnostics.sub_solver_grad_calls += br.grad_calls;
    run.diagnostics.sub_solver_f_calls += br.f_calls;
    let f11 = run.oracle.value(&x1, &y1)?;
    let s1 = T::lit(2.0) * br.value - f11;
    let s_gap = s1 - s_lower;
    if s_gap < T::zero() {
        return Err(Error::Parameter(format!(
            "S lower bound {s_lower} exceeds S1 = {s1}; it cannot be a lower bound"
        )));
    }

    let mut l = l1;
    let mut total = 0usize;
    for stage in 1.. {
        let mut rec = StageRecord::new(stage, l, mu, s_gap, cfg.epsilon);
        let fields = StepFields {
            l11: Some(l),
            l12: Some(l),
            l22: Some(l),
            mu: Some(mu),
            beta: Some(rec.alpha),
            gamma: Some(rec.beta),
            ..Default::default()
        };
        let (mut x, mut y) = (x1.clone(), y1.clone());
        let mut k = 1usize;
        let last = loop {
            total += 1;
            let at = run.eval_point(&x, &y)?;
            let gaps = run.gaps(&x, &y, &at, rec.alpha, rec.beta, None)?;
            let budget_spent = T::count(k) >= rec.t_budget;
            if gaps.converged(cfg.epsilon) || budget_spent || total > cfg.max_outer_iters {
                run.record(total, 0, at.f, &gaps, fields, true);
                break gaps;
            }
            let y_next = projected_step(set_y, &y, rec.beta.recip(), &at.grad_y)?;
            let gx = run.oracle.grad_x(&x, &y_next)?;
            let x_next = projected_step(set_x, &x, -rec.alpha.recip(), &gx)?;
            run.record(total, 1, at.f, &gaps, fields, false);
            run.iterations = total;
            x = x_next;
            y = y_next;
            k += 1;
        };
        rec.iterations = k - 1;
        run.stages.push(rec);

        if last.converged(cfg.epsilon) {
            return Ok(Finish::new(Status::Converged, x, y, last.tested));
        }
        if total > cfg.max_outer_iters {
            return Ok(Finish::new(Status::MaxIters, x, y, last.tested));
        }
        if stage >= cfg.max_trials {
            let mut finish = Finish::new(Status::Stalled, x, y, last.tested);
            finish.error = Some(Error::Stalled {
                iteration: total,
                trials: stage,
            });
            return Ok(finish);
        }
        // Step 4: restart from the initial point with a doubled estimate.
        run.diagnostics.restarts += 1;
        l = l + l;
    }
    unreachable!("stage loop exits through convergence or a cap")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::FnObjective;
    use crate::projections::FeasibleSet;
    use crate::solvers::RestartParams;

    /// f = x y − y² on Y = [−1, 1]; max_y f = x²/4 for |x| ≤ 2.
    fn problem() -> MinimaxProblem<f64> {
        MinimaxProblem::new(
            "xy",
            1,
            1,
            FnObjective::new(
                |x: &[f64], y: &[f64]| x[0] * y[0] - y[0] * y[0],
                |_: &[f64], y: &[f64]| vec![y[0]],
                |x: &[f64], y: &[f64]| vec![x[0] - 2.0 * y[0]],
            ),
        )
        .unwrap()
        .with_set_y(FeasibleSet::cube(1, 1.0).unwrap())
        .unwrap()
    }

    #[test]
    fn best_response_matches_closed_form() {
        let br = best_response(&problem(), &[1.0], &[-1.0]).unwrap();
        assert!((br.y[0] - 0.5).abs() < 1e-8);
        assert!((br.value - 0.25).abs() < 1e-12);
        assert!(br.grad_calls > 0);
    }

    #[test]
    fn best_response_on_boundary() {
        let br = best_response(&problem(), &[4.0], &[0.0]).unwrap();
        assert_eq!(br.y, vec![1.0]);
    }

    #[test]
    fn stage_parameters() {
        let rec = StageRecord::new(1, 2.0, 0.5, 1.0, 1e-3);
        assert_eq!(rec.beta, 6.0);
        assert_eq!(rec.alpha, 158.0 * 8.0 / 0.25);
        assert_eq!(rec.eta, (12.0 + 0.5) * 8.0 / (0.5 * 6.0));
        assert!(rec.d1 > 0.0);
        assert_eq!(rec.t_budget, 1.0 / (1e-6 * rec.d1));
        let small = StageRecord::new(1, 0.01, 0.5, 1.0, 1e-3);
        assert!(small.d1 < 0.0 && small.t_budget == 0.0);
    }

    #[test]
    fn missing_params_rejected() {
        let cfg = SolverConfig::new(vec![1.0], vec![0.0]);
        assert!(matches!(r_pf_agp_nsc(&problem(), &cfg), Err(Error::Parameter(_))));
    }

    #[test]
    fn stationary_start_converges_in_first_stage() {
        let cfg = SolverConfig::new(vec![0.0], vec![0.0]).with_restart(RestartParams {
            mu: 2.0,
            s_lower: 0.0,
            l1: Some(4.0),
        });
        let r = r_pf_agp_nsc(&problem(), &cfg).unwrap();
        assert_eq!(r.status, Status::Converged);
        assert_eq!(r.stages.len(), 1);
        assert_eq!(r.diagnostics.restarts, 0);
    }

    #[test]
    fn converges_with_restarts() {
        let cfg = SolverConfig::new(vec![1.5], vec![-1.0])
            .with_epsilon(1e-4)
            .with_restart(RestartParams {
                mu: 2.0,
                s_lower: 0.0,
                l1: Some(0.05),
            });
        let r = r_pf_agp_nsc(&problem(), &cfg).unwrap();
        assert_eq!(r.status, Status::Converged, "{:?}", r.error);
        assert!(r.diagnostics.restarts >= 1);
        assert_eq!(r.stages.len() as u64, r.diagnostics.restarts + 1);
        assert!(r.x[0].abs() < 1e-3);
    }
}
