use crate::error::{Error, Result};
use crate::problem::{FnObjective, MinimaxProblem};
use crate::projections::FeasibleSet;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticParams<T> {
    pub eps: T,
    pub lambda: T,
}

impl<T: Scalar> Default for SyntheticParams<T> {
    fn default() -> Self {
        SyntheticParams {
            eps: T::lit(0.01),
            lambda: T::lit(5.0),
        }
    }
}

impl<T: Scalar> SyntheticParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > T::zero()) || !self.eps.is_finite() {
            return Err(Error::Parameter(format!("synthetic eps must be positive, got {}", self.eps)));
        }
        if !(self.lambda > T::one()) || !self.lambda.is_finite() {
            return Err(Error::Parameter(format!("synthetic lambda must exceed 1, got {}", self.lambda)));
        }
        Ok(())
    }

    /// The five breakpoints `−λ√ε, −√ε, 0, √ε, λ√ε`.
    pub fn breakpoints(&self) -> [T; 5] {
        let s = self.eps.sqrt();
        [-self.lambda * s, -s, T::zero(), s, self.lambda * s]
    }
}

/// Piecewise cubic `w` and its derivative. A point exactly on a breakpoint
/// takes the branch to its left.
pub fn w_eval<T: Scalar>(x: T, p: &SyntheticParams<T>) -> (T, T) {
    let s = p.eps.sqrt();
    let e32 = p.eps * s;
    let third = T::lit(1.0 / 3.0);
    let two = T::lit(2.0);
    let shift = (p.lambda + T::one()) * s;
    let tail = third * (T::lit(3.0) * p.lambda + T::one()) * e32;
    let ls = p.lambda * s;

    if x <= -ls {
        let u = x + shift;
        (s * u * u - third * u * u * u - tail, two * s * u - u * u)
    } else if x <= -s {
        (p.eps * x + third * e32, p.eps)
    } else if x <= T::zero() {
        (-s * x * x - third * x * x * x, -two * s * x - x * x)
    } else if x <= s {
        (-s * x * x + third * x * x * x, -two * s * x + x * x)
    } else if x <= ls {
        (-p.eps * x + third * e32, -p.eps)
    } else {
        let u = x - shift;
        (s * u * u + third * u * u * u - tail, two * s * u + u * u)
    }
}

/// `f(x, y) = w(x₃) − y₁²/40 + x₁y₁ − 5y₂²/2 + x₂y₂` on `ℝ³ × ℝ²`.
pub fn make_synthetic<T: Scalar>(params: SyntheticParams<T>) -> Result<MinimaxProblem<T>> {
    params.validate()?;
    let p = params;
    let c1 = T::lit(1.0 / 40.0);
    let c2 = T::lit(2.5);
    let obj = FnObjective::new(
        move |x: &[T], y: &[T]| {
            w_eval(x[2], &p).0 - c1 * y[0] * y[0] + x[0] * y[0] - c2 * y[1] * y[1] + x[1] * y[1]
        },
        move |x: &[T], y: &[T]| vec![y[0], y[1], w_eval(x[2], &p).1],
        move |x: &[T], y: &[T]| {
            let two = T::lit(2.0);
            vec![x[0] - two * c1 * y[0], x[1] - two * c2 * y[1]]
        },
    );
    MinimaxProblem::new("synthetic", 3, 2, obj)
}

/// [`make_synthetic`] with `Y = [−h, h]²`, for solvers that need compact `Y`.
pub fn make_synthetic_boxed<T: Scalar>(params: SyntheticParams<T>, half_width: T) -> Result<MinimaxProblem<T>> {
    make_synthetic(params)?.with_set_y(FeasibleSet::cube(2, half_width)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The six branches written out independently, for boundary checks.
    fn branch(i: usize, x: f64, eps: f64, lam: f64) -> (f64, f64) {
        let s = eps.sqrt();
        let e32 = eps.powf(1.5);
        match i {
            0 => {
                let u = x + (lam + 1.0) * s;
                (s * u.powi(2) - u.powi(3) / 3.0 - (3.0 * lam + 1.0) * e32 / 3.0, 2.0 * s * u - u * u)
            }
            1 => (eps * x + e32 / 3.0, eps),
            2 => (-s * x * x - x.powi(3) / 3.0, -2.0 * s * x - x * x),
            3 => (-s * x * x + x.powi(3) / 3.0, -2.0 * s * x + x * x),
            4 => (-eps * x + e32 / 3.0, -eps),
            _ => {
                let u = x - (lam + 1.0) * s;
                (s * u.powi(2) + u.powi(3) / 3.0 - (3.0 * lam + 1.0) * e32 / 3.0, 2.0 * s * u + u * u)
            }
        }
    }

    #[test]
    fn origin() {
        let p = SyntheticParams::<f64>::default();
        assert_eq!(w_eval(0.0, &p), (0.0, 0.0));
    }

    #[test]
    fn continuous_at_breakpoints() {
        for (eps, lam) in [(0.01, 5.0), (0.04, 2.0), (1e-4, 10.0), (0.25, 1.5)] {
            let p = SyntheticParams { eps, lambda: lam };
            for (j, b) in p.breakpoints().iter().enumerate() {
                let (vl, dl) = branch(j, *b, eps, lam);
                let (vr, dr) = branch(j + 1, *b, eps, lam);
                assert!((vl - vr).abs() <= 1e-12, "value jump at {b}");
                assert!((dl - dr).abs() <= 1e-10, "slope jump at {b}");
                let (v, d) = w_eval(*b, &p);
                assert!((v - vl).abs() <= 1e-15 && (d - dl).abs() <= 1e-15, "left branch at {b}");
            }
        }
    }

    #[test]
    fn last_branch_at_two() {
        let p = SyntheticParams::<f64>::default();
        let (v, d) = w_eval(2.0, &p);
        let (bv, bd) = branch(5, 2.0, 0.01, 5.0);
        assert!((v - bv).abs() < 1e-15 && (d - bd).abs() < 1e-15);
        // trapezoid integral of w' from 0 to 2
        let n = 200_000;
        let h = 2.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let a = w_eval(i as f64 * h, &p).1;
            let b = w_eval((i + 1) as f64 * h, &p).1;
            acc += 0.5 * h * (a + b);
        }
        assert!((acc - v).abs() < 1e-8, "{acc} vs {v}");
    }

    #[test]
    fn saddle_at_origin() {
        let pr = make_synthetic(SyntheticParams::<f64>::default()).unwrap();
        let z3 = [0.0; 3];
        let z2 = [0.0; 2];
        assert_eq!(pr.grad_x(&z3, &z2), vec![0.0; 3]);
        assert_eq!(pr.grad_y(&z3, &z2), vec![0.0; 2]);
    }

    #[test]
    fn y_hessian_is_constant() {
        let pr = make_synthetic(SyntheticParams::<f64>::default()).unwrap();
        let x = [0.3, -0.7, 1.1];
        let g0 = pr.grad_y(&x, &[0.0, 0.0]);
        let g1 = pr.grad_y(&x, &[1.0, 0.0]);
        let g2 = pr.grad_y(&x, &[0.0, 1.0]);
        assert!((g1[0] - g0[0] + 1.0 / 20.0).abs() < 1e-15);
        assert!((g2[1] - g0[1] + 5.0).abs() < 1e-15);
        assert_eq!(g1[1] - g0[1], 0.0);
    }

    #[test]
    fn invalid_params() {
        assert!(make_synthetic(SyntheticParams { eps: 0.0, lambda: 5.0 }).is_err());
        assert!(make_synthetic(SyntheticParams { eps: 0.01, lambda: 1.0 }).is_err());
    }
}
