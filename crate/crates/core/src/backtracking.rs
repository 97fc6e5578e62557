//! Backtracking tests for the smoothness and strong-concavity estimates.
//!
//! Each outer iteration tries a trial pair `(x_trial, y_trial)` and evaluates
//! up to five inequalities:
//!
//! * `C1`: `x ↦ f(x, y_k)` is `l11`-smooth along the step,
//! * `C2`: `x ↦ ∇_y f(x, y_k)` is `l12`-Lipschitz along the step,
//! * `C3`: cocoercivity of `y ↦ ∇_y f(x_trial, y)` with constant `l22`,
//! * `C4`: `y ↦ f(x_trial, y)` is `mu`-strongly concave along the step,
//! * `C5`: `C3` for the regularized `f − (c/2)‖y‖²` with constant `l22 + c`.
//!
//! A violated condition doubles its `l` estimate (or halves `mu`); a satisfied
//! one leaves the estimate unchanged.
//!
//! The `c1`..`c5` functions work from values already in hand so that solvers
//! don't pay for extra oracle calls. The `eval_c*` wrappers query the problem.

use crate::error::Result;
use crate::problem::{CountingOracle, MinimaxProblem};
use crate::scalar::Scalar;
use crate::vector;

/// `+1` for `x > 0`, `−1` otherwise (including zero).
#[inline]
pub fn sgn<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else {
        -T::one()
    }
}

/// `((sgn(c) + 3) / 2) · l`: doubles on violation, keeps on satisfaction.
#[inline]
pub fn update_estimate_up<T: Scalar>(l: T, c_value: T) -> T {
    (sgn(c_value) + T::lit(3.0)) / T::lit(2.0) * l
}

/// `(2 / (sgn(c) + 3)) · mu`: halves on violation, keeps on satisfaction.
#[inline]
pub fn update_estimate_down<T: Scalar>(mu: T, c4_value: T) -> T {
    T::lit(2.0) / (sgn(c4_value) + T::lit(3.0)) * mu
}

/// Absolute slack for condition tests at a point with objective value `f_k`.
#[inline]
pub fn condition_tolerance<T: Scalar>(f_k: T) -> T {
    T::condition_slack() * (T::one() + f_k.abs())
}

/// `f(x_trial, y_k) − f(x_k, y_k) − ⟨∇_x f(x_k, y_k), x_trial − x_k⟩ − (l11/2)‖x_trial − x_k‖²`.
pub fn c1<T: Scalar>(f_trial: T, f_k: T, grad_x_k: &[T], x_k: &[T], x_trial: &[T], l11: T) -> T {
    let dx = vector::sub(x_trial, x_k);
    f_trial - f_k - vector::dot(grad_x_k, &dx) - l11 / T::lit(2.0) * vector::norm_sq(&dx)
}

/// `‖∇_y f(x_trial, y_k) − ∇_y f(x_k, y_k)‖ − l12‖x_trial − x_k‖`.
pub fn c2<T: Scalar>(grad_y_trial: &[T], grad_y_k: &[T], x_k: &[T], x_trial: &[T], l12: T) -> T {
    vector::dist(grad_y_trial, grad_y_k) - l12 * vector::dist(x_trial, x_k)
}

/// With `g = ∇_y f(x_trial, y_trial) − ∇_y f(x_trial, y_k)`:
/// `l22⟨g, y_trial − y_k⟩ + ‖g‖²`.
///
/// The second gradient is taken at `y_k`. Read literally, the first
/// displayed term differences the gradient at `y_trial` against itself and
/// vanishes; the intended cocoercivity test uses `y_k`, as the second term does.
pub fn c3<T: Scalar>(grad_new: &[T], grad_old: &[T], y_k: &[T], y_trial: &[T], l22: T) -> T {
    let g = vector::sub(grad_new, grad_old);
    let dy = vector::sub(y_trial, y_k);
    l22 * vector::dot(&g, &dy) + vector::norm_sq(&g)
}

/// `⟨g, y_trial − y_k⟩ + mu‖y_trial − y_k‖²` with `g` as in [`c3`].
pub fn c4<T: Scalar>(grad_new: &[T], grad_old: &[T], y_k: &[T], y_trial: &[T], mu: T) -> T {
    let g = vector::sub(grad_new, grad_old);
    let dy = vector::sub(y_trial, y_k);
    vector::dot(&g, &dy) + mu * vector::norm_sq(&dy)
}

/// [`c3`] for the regularized objective: `g_c = g − c·(y_trial − y_k)`,
/// value `(l22 + c)⟨g_c, y_trial − y_k⟩ + ‖g_c‖²`. Equals `c3` when `c = 0`.
pub fn c5<T: Scalar>(grad_new: &[T], grad_old: &[T], y_k: &[T], y_trial: &[T], l22: T, c: T) -> T {
    let dy = vector::sub(y_trial, y_k);
    let mut g = vector::sub(grad_new, grad_old);
    if c != T::zero() {
        g = vector::axpy(&g, -c, &dy);
    }
    (l22 + c) * vector::dot(&g, &dy) + vector::norm_sq(&g)
}

/// `C1` evaluated through the problem oracles.
pub fn eval_c1<T: Scalar>(
    problem: &MinimaxProblem<T>,
    x_k: &[T],
    y_k: &[T],
    x_trial: &[T],
    l11: T,
) -> Result<T> {
    problem.check_point(x_k, y_k)?;
    problem.check_point(x_trial, y_k)?;
    let o = CountingOracle::new(problem);
    let f_k = o.value(x_k, y_k)?;
    let f_trial = o.value(x_trial, y_k)?;
    let g = o.grad_x(x_k, y_k)?;
    Ok(c1(f_trial, f_k, &g, x_k, x_trial, l11))
}

/// `C2` evaluated through the problem oracles.
pub fn eval_c2<T: Scalar>(
    problem: &MinimaxProblem<T>,
    x_k: &[T],
    y_k: &[T],
    x_trial: &[T],
    l12: T,
) -> Result<T> {
    problem.check_point(x_k, y_k)?;
    problem.check_point(x_trial, y_k)?;
    let o = CountingOracle::new(problem);
    let g_trial = o.grad_y(x_trial, y_k)?;
    let g_k = o.grad_y(x_k, y_k)?;
    Ok(c2(&g_trial, &g_k, x_k, x_trial, l12))
}

fn y_gradients<T: Scalar>(
    problem: &MinimaxProblem<T>,
    x_trial: &[T],
    y_k: &[T],
    y_trial: &[T],
) -> Result<(Vec<T>, Vec<T>)> {
    problem.check_point(x_trial, y_k)?;
    problem.check_point(x_trial, y_trial)?;
    let o = CountingOracle::new(problem);
    Ok((o.grad_y(x_trial, y_trial)?, o.grad_y(x_trial, y_k)?))
}

/// `C3` evaluated through the problem oracles.
pub fn eval_c3<T: Scalar>(
    problem: &MinimaxProblem<T>,
    x_trial: &[T],
    y_k: &[T],
    y_trial: &[T],
    l22: T,
) -> Result<T> {
    let (new, old) = y_gradients(problem, x_trial, y_k, y_trial)?;
    Ok(c3(&new, &old, y_k, y_trial, l22))
}

/// `C4` evaluated through the problem oracles.
pub fn eval_c4<T: Scalar>(
    problem: &MinimaxProblem<T>,
    x_trial: &[T],
    y_k: &[T],
    y_trial: &[T],
    mu: T,
) -> Result<T> {
    let (new, old) = y_gradients(problem, x_trial, y_k, y_trial)?;
    Ok(c4(&new, &old, y_k, y_trial, mu))
}

/// `C5` evaluated through the problem oracles.
pub fn eval_c5<T: Scalar>(
    problem: &MinimaxProblem<T>,
    x_trial: &[T],
    y_k: &[T],
    y_trial: &[T],
    l22: T,
    c: T,
) -> Result<T> {
    let (new, old) = y_gradients(problem, x_trial, y_k, y_trial)?;
    Ok(c5(&new, &old, y_k, y_trial, l22, c))
}

/// Condition values of one trial. Unused conditions are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionValues<T> {
    pub c1: Option<T>,
    pub c2: Option<T>,
    pub c3: Option<T>,
    pub c4: Option<T>,
    pub c5: Option<T>,
    pub x_trial: Vec<T>,
    pub y_trial: Vec<T>,
}

impl<T: Scalar> ConditionValues<T> {
    pub fn new(x_trial: Vec<T>, y_trial: Vec<T>) -> Self {
        ConditionValues {
            c1: None,
            c2: None,
            c3: None,
            c4: None,
            c5: None,
            x_trial,
            y_trial,
        }
    }

    fn values(&self) -> impl Iterator<Item = T> + '_ {
        [self.c1, self.c2, self.c3, self.c4, self.c5].into_iter().flatten()
    }

    /// True when every evaluated condition is `≤ tol`.
    pub fn all_satisfied(&self, tol: T) -> bool {
        self.values().all(|v| v <= tol)
    }

    /// Largest evaluated condition value, or `None` if nothing was evaluated.
    pub fn max_value(&self) -> Option<T> {
        self.values().reduce(|a, b| a.max(b))
    }
}

/// Running estimates `l11`, `l12`, `l22`, `mu` of one solver run, with
/// doubling and halving counters.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateState<T> {
    pub l11: T,
    pub l12: T,
    pub l22: T,
    pub mu: T,
    /// Trial index within the current outer iteration.
    pub trial: usize,
    /// Doublings of `l11`, `l12`, `l22` over the whole run.
    pub doublings: [u64; 3],
    pub mu_halvings: u64,
}

impl<T: Scalar> EstimateState<T> {
    pub fn new(l11: T, l12: T, l22: T, mu: T) -> Self {
        EstimateState {
            l11,
            l12,
            l22,
            mu,
            trial: 0,
            doublings: [0; 3],
            mu_halvings: 0,
        }
    }

    /// Applies the sign-based update for every evaluated condition.
    ///
    /// The conditions are compared against `tol`, so the update and the
    /// acceptance test agree: `C − tol ≤ 0` leaves the estimate unchanged.
    /// `C3` and `C5` both drive `l22`.
    pub fn apply(&mut self, conds: &ConditionValues<T>, tol: T) {
        if let Some(v) = conds.c1 {
            self.l11 = bump_up(self.l11, v - tol, &mut self.doublings[0]);
        }
        if let Some(v) = conds.c2 {
            self.l12 = bump_up(self.l12, v - tol, &mut self.doublings[1]);
        }
        let l22_cond = match (conds.c3, conds.c5) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        if let Some(v) = l22_cond {
            self.l22 = bump_up(self.l22, v - tol, &mut self.doublings[2]);
        }
        if let Some(v) = conds.c4 {
            let next = update_estimate_down(self.mu, v - tol);
            if next != self.mu {
                self.mu_halvings += 1;
            }
            self.mu = next;
        }
        self.trial += 1;
    }

    pub fn total_doublings(&self) -> u64 {
        self.doublings.iter().sum()
    }
}

fn bump_up<T: Scalar>(l: T, c: T, counter: &mut u64) -> T {
    let next = update_estimate_up(l, c);
    if next != l {
        *counter += 1;
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::FnObjective;

    fn problem(
        value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        gx: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        gy: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> MinimaxProblem<f64> {
        MinimaxProblem::new(
            "1d",
            1,
            1,
            FnObjective::new(
                move |x: &[f64], y: &[f64]| value(x[0], y[0]),
                move |x: &[f64], y: &[f64]| vec![gx(x[0], y[0])],
                move |x: &[f64], y: &[f64]| vec![gy(x[0], y[0])],
            ),
        )
        .unwrap()
    }

    fn square() -> MinimaxProblem<f64> {
        problem(|x, _| x * x, |x, _| 2.0 * x, |_, _| 0.0)
    }

    fn coupling(k: f64) -> MinimaxProblem<f64> {
        problem(move |x, y| k * x * y, move |_, y| k * y, move |x, _| k * x)
    }

    fn concave(a: f64) -> MinimaxProblem<f64> {
        problem(move |_, y| -0.5 * a * y * y, |_, _| 0.0, move |_, y| -a * y)
    }

    #[test]
    fn sgn_values() {
        assert_eq!(sgn(0.5), 1.0);
        assert_eq!(sgn(0.0), -1.0);
        assert_eq!(sgn(-3.0), -1.0);
    }

    #[test]
    fn estimate_updates() {
        assert_eq!(update_estimate_up(0.01, 0.3), 0.02);
        assert_eq!(update_estimate_up(0.01, 0.0), 0.01);
        assert_eq!(update_estimate_up(1.0, -5.0), 1.0);
        assert_eq!(update_estimate_down(0.01, 1.0), 0.005);
        assert_eq!(update_estimate_down(0.01, 0.0), 0.01);
        assert_eq!(update_estimate_down(2.0, -0.1), 2.0);
    }

    #[test]
    fn c1_examples() {
        let p = square();
        assert_eq!(eval_c1(&p, &[1.0], &[0.0], &[0.5], 2.0).unwrap(), 0.0);
        assert_eq!(eval_c1(&p, &[1.0], &[0.0], &[1.0], 2.0).unwrap(), 0.0);
        assert_eq!(eval_c1(&p, &[1.0], &[0.0], &[0.5], 1.0).unwrap(), 0.125);
    }

    #[test]
    fn c2_examples() {
        assert_eq!(eval_c2(&coupling(1.0), &[0.0], &[0.0], &[1.0], 1.0).unwrap(), 0.0);
        assert_eq!(eval_c2(&coupling(1.0), &[0.3], &[0.0], &[0.3], 1.0).unwrap(), 0.0);
        assert_eq!(eval_c2(&coupling(2.0), &[0.0], &[0.0], &[1.0], 1.0).unwrap(), 1.0);
    }

    #[test]
    fn c3_examples() {
        let a = 1.5;
        let p = concave(a);
        let (yk, yt) = (0.25, -0.75);
        let dy2: f64 = (yt - yk) * (yt - yk);
        assert_eq!(eval_c3(&p, &[0.0], &[yk], &[yt], a).unwrap(), 0.0);
        assert_eq!(eval_c3(&p, &[0.0], &[yk], &[yk], a).unwrap(), 0.0);
        let v = eval_c3(&p, &[0.0], &[yk], &[yt], a / 2.0).unwrap();
        assert!((v - a * a / 2.0 * dy2).abs() < 1e-15);
    }

    #[test]
    fn c4_examples() {
        let a = 1.5;
        let p = concave(a);
        let (yk, yt) = (0.25, -0.75);
        let dy2: f64 = (yt - yk) * (yt - yk);
        assert_eq!(eval_c4(&p, &[0.0], &[yk], &[yt], a).unwrap(), 0.0);
        assert_eq!(eval_c4(&p, &[0.0], &[yk], &[yk], a).unwrap(), 0.0);
        assert_eq!(eval_c4(&p, &[0.0], &[yk], &[yt], 2.0 * a).unwrap(), a * dy2);
    }

    #[test]
    fn c5_examples() {
        let p = concave(0.8);
        let c3v = eval_c3(&p, &[0.1], &[0.3], &[-0.4], 0.6).unwrap();
        let c5v = eval_c5(&p, &[0.1], &[0.3], &[-0.4], 0.6, 0.0).unwrap();
        assert_eq!(c3v.to_bits(), c5v.to_bits());

        // linear in y: g = 0, g_c = -c dy
        let lin = coupling(1.0);
        for (l22, c) in [(0.5, 0.5), (2.0, 0.1), (1.0, 0.9)] {
            let v = eval_c5(&lin, &[0.4], &[0.3], &[-0.2], l22, c).unwrap();
            let dy2: f64 = 0.25;
            let expected = -(l22 + c) * c * dy2 + c * c * dy2;
            assert!((v - expected).abs() < 1e-15);
            assert!(v <= 0.0);
        }
        assert_eq!(eval_c5(&lin, &[0.4], &[0.3], &[0.3], 1.0, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn state_doubles_and_halves() {
        let mut s = EstimateState::new(1.0, 1.0, 1.0, 1.0);
        let mut conds = ConditionValues::new(vec![], vec![]);
        conds.c1 = Some(0.1);
        conds.c2 = Some(-0.1);
        conds.c3 = Some(0.0);
        conds.c4 = Some(2.0);
        s.apply(&conds, 0.0);
        assert_eq!((s.l11, s.l12, s.l22, s.mu), (2.0, 1.0, 1.0, 0.5));
        assert_eq!(s.doublings, [1, 0, 0]);
        assert_eq!(s.mu_halvings, 1);
        assert!(!conds.all_satisfied(0.0));
        assert_eq!(conds.max_value(), Some(2.0));
    }

    #[test]
    fn slack_counts_as_satisfied() {
        let mut s = EstimateState::new(1.0, 1.0, 1.0, 1.0);
        let mut conds = ConditionValues::new(vec![], vec![]);
        conds.c1 = Some(1e-14);
        s.apply(&conds, 1e-12);
        assert_eq!(s.l11, 1.0);
        assert!(conds.all_satisfied(1e-12));
    }
}
