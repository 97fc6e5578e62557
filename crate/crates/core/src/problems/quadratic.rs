use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::problem::{FnObjective, KnownConstants, MinimaxProblem};
use crate::projections::FeasibleSet;
use crate::scalar::Scalar;

/// `f(x, y) = ½xᵀQx + xᵀBy − (a/2)‖y‖² + pᵀx + rᵀy` with optional ball
/// constraints centred at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticOracleSpec<T> {
    /// Symmetric `n × n`, rows.
    pub q: Vec<Vec<T>>,
    /// `n × m`, rows.
    pub b: Vec<Vec<T>>,
    pub a: T,
    /// Linear term in `x`; empty means zero.
    pub p: Vec<T>,
    /// Linear term in `y`; empty means zero.
    pub r: Vec<T>,
    pub radius_x: Option<T>,
    pub radius_y: Option<T>,
}

impl<T: Scalar> QuadraticOracleSpec<T> {
    pub fn new(q: Vec<Vec<T>>, b: Vec<Vec<T>>, a: T) -> Self {
        QuadraticOracleSpec {
            q,
            b,
            a,
            p: Vec::new(),
            r: Vec::new(),
            radius_x: None,
            radius_y: None,
        }
    }

    pub fn with_radii(mut self, radius_x: Option<T>, radius_y: Option<T>) -> Self {
        self.radius_x = radius_x;
        self.radius_y = radius_y;
        self
    }

    pub fn with_linear(mut self, p: Vec<T>, r: Vec<T>) -> Self {
        self.p = p;
        self.r = r;
        self
    }

    /// `Q = diag(2, −2)`, `B = I`, `a = 0.5` on `‖x‖ ≤ 1`, `‖y‖ ≤ 3`:
    /// `L11 = 2`, `L12 = 1`, `L22 = μ = 0.5`.
    pub fn reference() -> Self {
        let (z, one, two) = (T::zero(), T::one(), T::lit(2.0));
        Self::new(vec![vec![two, z], vec![z, -two]], vec![vec![one, z], vec![z, one]], T::lit(0.5))
            .with_radii(Some(T::one()), Some(T::lit(3.0)))
    }

    /// Seeded instance: symmetric `Q` and `B` with entries in `[−1, 1]`,
    /// `a ∈ [0.5, 1.5]`, radii 1 and 3.
    #[allow(clippy::needless_range_loop)]
    pub fn random(n: usize, m: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut q = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let v = T::lit(rng.gen_range(-1.0..=1.0));
                q[i][j] = v;
                q[j][i] = v;
            }
        }
        let b = (0..n)
            .map(|_| (0..m).map(|_| T::lit(rng.gen_range(-1.0..=1.0))).collect())
            .collect();
        let a = T::lit(rng.gen_range(0.5..=1.5));
        Self::new(q, b, a).with_radii(Some(T::one()), Some(T::lit(3.0)))
    }

    pub fn dim_x(&self) -> usize {
        self.q.len()
    }

    pub fn dim_y(&self) -> usize {
        self.b.first().map_or(0, Vec::len)
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim_x();
        let m = self.dim_y();
        if n == 0 || m == 0 {
            return Err(Error::InvalidShape("Q and B must be non-empty".into()));
        }
        if let Some(row) = self.q.iter().find(|r| r.len() != n) {
            return Err(Error::Shape {
                context: "Q row length",
                expected: n,
                got: row.len(),
            });
        }
        if self.b.len() != n {
            return Err(Error::Shape {
                context: "B row count",
                expected: n,
                got: self.b.len(),
            });
        }
        if let Some(row) = self.b.iter().find(|r| r.len() != m) {
            return Err(Error::Shape {
                context: "B row length",
                expected: m,
                got: row.len(),
            });
        }
        for i in 0..n {
            for j in 0..i {
                if self.q[i][j] != self.q[j][i] {
                    return Err(Error::InvalidShape(format!("Q is not symmetric at ({i}, {j})")));
                }
            }
        }
        if !self.p.is_empty() && self.p.len() != n {
            return Err(Error::Shape {
                context: "linear term p",
                expected: n,
                got: self.p.len(),
            });
        }
        if !self.r.is_empty() && self.r.len() != m {
            return Err(Error::Shape {
                context: "linear term r",
                expected: m,
                got: self.r.len(),
            });
        }
        if !(self.a > T::zero()) || !self.a.is_finite() {
            return Err(Error::Parameter(format!("a must be positive, got {}", self.a)));
        }
        Ok(())
    }

    fn matrix(rows: &[Vec<T>]) -> DMatrix<f64> {
        let (r, c) = (rows.len(), rows.first().map_or(0, Vec::len));
        DMatrix::from_fn(r, c, |i, j| rows[i][j].to_f64_lossy())
    }

    /// `(‖Q‖₂, ‖B‖₂, a, a)`.
    pub fn constants(&self) -> Result<KnownConstants<T>> {
        self.validate()?;
        let norm = |m: DMatrix<f64>| m.singular_values().iter().copied().fold(0.0, f64::max);
        Ok(KnownConstants {
            l11: T::lit(norm(Self::matrix(&self.q))),
            l12: T::lit(norm(Self::matrix(&self.b))),
            l22: self.a,
            mu: self.a,
        })
    }

    /// Solves `Qx + By + p = 0`, `Bᵀx − a y + r = 0`, the stationary point of
    /// the unconstrained problem. `None` when the system is singular.
    pub fn unconstrained_saddle(&self) -> Result<Option<(Vec<T>, Vec<T>)>> {
        self.validate()?;
        let (n, m) = (self.dim_x(), self.dim_y());
        let q = Self::matrix(&self.q);
        let b = Self::matrix(&self.b);
        let mut k = DMatrix::zeros(n + m, n + m);
        k.view_mut((0, 0), (n, n)).copy_from(&q);
        k.view_mut((0, n), (n, m)).copy_from(&b);
        k.view_mut((n, 0), (m, n)).copy_from(&b.transpose());
        k.view_mut((n, n), (m, m))
            .copy_from(&(DMatrix::identity(m, m) * -self.a.to_f64_lossy()));
        let rhs = DVector::from_fn(n + m, |i, _| {
            let v = if i < n { self.p.get(i) } else { self.r.get(i - n) };
            -v.map_or(0.0, |t| t.to_f64_lossy())
        });
        Ok(k.lu().solve(&rhs).map(|s| {
            let x = (0..n).map(|i| T::lit(s[i])).collect();
            let y = (n..n + m).map(|i| T::lit(s[i])).collect();
            (x, y)
        }))
    }
}

fn mat_vec<T: Scalar>(rows: &[Vec<T>], v: &[T]) -> Vec<T> {
    rows.iter()
        .map(|r| r.iter().zip(v).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
        .collect()
}

fn mat_t_vec<T: Scalar>(rows: &[Vec<T>], v: &[T], cols: usize) -> Vec<T> {
    let mut out = vec![T::zero(); cols];
    for (r, &vi) in rows.iter().zip(v) {
        for (o, &a) in out.iter_mut().zip(r) {
            *o = *o + a * vi;
        }
    }
    out
}

/// Builds the quadratic problem with its constants attached.
pub fn make_quadratic_oracle<T: Scalar>(spec: &QuadraticOracleSpec<T>) -> Result<MinimaxProblem<T>> {
    let constants = spec.constants()?;
    let (n, m) = (spec.dim_x(), spec.dim_y());
    let p = if spec.p.is_empty() { vec![T::zero(); n] } else { spec.p.clone() };
    let r = if spec.r.is_empty() { vec![T::zero(); m] } else { spec.r.clone() };
    let half = T::lit(0.5);
    let a = spec.a;

    let (q1, b1, p1, r1) = (spec.q.clone(), spec.b.clone(), p.clone(), r.clone());
    let value = move |x: &[T], y: &[T]| {
        let qx = mat_vec(&q1, x);
        let by = mat_vec(&b1, y);
        let dot = |u: &[T], v: &[T]| u.iter().zip(v).fold(T::zero(), |acc, (&s, &t)| acc + s * t);
        half * dot(x, &qx) + dot(x, &by) - half * a * dot(y, y) + dot(&p1, x) + dot(&r1, y)
    };
    let (q2, b2) = (spec.q.clone(), spec.b.clone());
    let grad_x = move |x: &[T], y: &[T]| {
        let qx = mat_vec(&q2, x);
        let by = mat_vec(&b2, y);
        (0..qx.len()).map(|i| qx[i] + by[i] + p[i]).collect()
    };
    let b3 = spec.b.clone();
    let grad_y = move |x: &[T], y: &[T]| {
        let btx = mat_t_vec(&b3, x, m);
        (0..m).map(|j| btx[j] - a * y[j] + r[j]).collect()
    };

    let mut problem = MinimaxProblem::new("quadratic", n, m, FnObjective::new(value, grad_x, grad_y))?
        .with_known_constants(constants);
    if let Some(rx) = spec.radius_x {
        problem = problem.with_set_x(FeasibleSet::ball(vec![T::zero(); n], rx)?)?;
    }
    if let Some(ry) = spec.radius_y {
        problem = problem.with_set_y(FeasibleSet::ball(vec![T::zero(); m], ry)?)?;
    }
    Ok(problem)
}
