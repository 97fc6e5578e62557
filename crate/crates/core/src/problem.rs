//! The minimax problem abstraction, stationarity gaps and gradient checking.
//!
//! A [`MinimaxProblem`] bundles a smooth objective `f(x, y)` with the feasible
//! sets `X` and `Y`. Solvers minimize over `x` and maximize over `y`.

use std::cell::{Cell, RefCell};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::projections::FeasibleSet;
use crate::scalar::Scalar;
use crate::vector;

/// Value and partial-gradient oracles of `f(x, y)`.
///
/// Implementations must be pure: identical inputs give identical outputs and
/// evaluation never mutates shared state, so runs may share a problem across
/// threads.
pub trait Objective<T: Scalar>: Send + Sync {
    fn value(&self, x: &[T], y: &[T]) -> T;
    fn grad_x(&self, x: &[T], y: &[T]) -> Vec<T>;
    fn grad_y(&self, x: &[T], y: &[T]) -> Vec<T>;
}

type ValueFn<T> = Box<dyn Fn(&[T], &[T]) -> T + Send + Sync>;
type GradFn<T> = Box<dyn Fn(&[T], &[T]) -> Vec<T> + Send + Sync>;

/// Objective assembled from three closures.
pub struct FnObjective<T> {
    value: ValueFn<T>,
    grad_x: GradFn<T>,
    grad_y: GradFn<T>,
}

impl<T: Scalar> FnObjective<T> {
    pub fn new(
        value: impl Fn(&[T], &[T]) -> T + Send + Sync + 'static,
        grad_x: impl Fn(&[T], &[T]) -> Vec<T> + Send + Sync + 'static,
        grad_y: impl Fn(&[T], &[T]) -> Vec<T> + Send + Sync + 'static,
    ) -> Self {
        FnObjective {
            value: Box::new(value),
            grad_x: Box::new(grad_x),
            grad_y: Box::new(grad_y),
        }
    }
}

impl<T: Scalar> Objective<T> for FnObjective<T> {
    fn value(&self, x: &[T], y: &[T]) -> T {
        (self.value)(x, y)
    }
    fn grad_x(&self, x: &[T], y: &[T]) -> Vec<T> {
        (self.grad_x)(x, y)
    }
    fn grad_y(&self, x: &[T], y: &[T]) -> Vec<T> {
        (self.grad_y)(x, y)
    }
}

/// Known smoothness and strong-concavity constants, when a problem has them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnownConstants<T> {
    pub l11: T,
    pub l12: T,
    pub l22: T,
    pub mu: T,
}

/// `min_{x∈X} max_{y∈Y} f(x, y)`.
#[derive(Clone)]
pub struct MinimaxProblem<T: Scalar> {
    name: String,
    dim_x: usize,
    dim_y: usize,
    objective: Arc<dyn Objective<T>>,
    set_x: FeasibleSet<T>,
    set_y: FeasibleSet<T>,
    linear_in_y: bool,
    known_constants: Option<KnownConstants<T>>,
}

impl<T: Scalar> fmt::Debug for MinimaxProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MinimaxProblem")
            .field("name", &self.name)
            .field("dim_x", &self.dim_x)
            .field("dim_y", &self.dim_y)
            .field("set_x", &self.set_x)
            .field("set_y", &self.set_y)
            .field("linear_in_y", &self.linear_in_y)
            .field("known_constants", &self.known_constants)
            .finish()
    }
}

impl<T: Scalar> MinimaxProblem<T> {
    /// New unconstrained problem. Use the `with_*` methods to attach sets and
    /// structure.
    pub fn new(
        name: impl Into<String>,
        dim_x: usize,
        dim_y: usize,
        objective: impl Objective<T> + 'static,
    ) -> Result<Self> {
        Self::from_arc(name, dim_x, dim_y, Arc::new(objective))
    }

    pub fn from_arc(
        name: impl Into<String>,
        dim_x: usize,
        dim_y: usize,
        objective: Arc<dyn Objective<T>>,
    ) -> Result<Self> {
        if dim_x == 0 || dim_y == 0 {
            return Err(Error::Parameter("problem dimensions must be positive".into()));
        }
        Ok(MinimaxProblem {
            name: name.into(),
            dim_x,
            dim_y,
            objective,
            set_x: FeasibleSet::unconstrained(dim_x),
            set_y: FeasibleSet::unconstrained(dim_y),
            linear_in_y: false,
            known_constants: None,
        })
    }

    pub fn with_set_x(mut self, set: FeasibleSet<T>) -> Result<Self> {
        if set.dim() != self.dim_x {
            return Err(Error::Shape {
                context: "set_x",
                expected: self.dim_x,
                got: set.dim(),
            });
        }
        self.set_x = set;
        Ok(self)
    }

    pub fn with_set_y(mut self, set: FeasibleSet<T>) -> Result<Self> {
        if set.dim() != self.dim_y {
            return Err(Error::Shape {
                context: "set_y",
                expected: self.dim_y,
                got: set.dim(),
            });
        }
        self.set_y = set;
        Ok(self)
    }

    pub fn with_linear_in_y(mut self, linear: bool) -> Self {
        self.linear_in_y = linear;
        self
    }

    pub fn with_known_constants(mut self, constants: KnownConstants<T>) -> Self {
        self.known_constants = Some(constants);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn dim_x(&self) -> usize {
        self.dim_x
    }
    pub fn dim_y(&self) -> usize {
        self.dim_y
    }
    pub fn set_x(&self) -> &FeasibleSet<T> {
        &self.set_x
    }
    pub fn set_y(&self) -> &FeasibleSet<T> {
        &self.set_y
    }
    pub fn linear_in_y(&self) -> bool {
        self.linear_in_y
    }
    pub fn known_constants(&self) -> Option<&KnownConstants<T>> {
        self.known_constants.as_ref()
    }
    pub fn objective(&self) -> &Arc<dyn Objective<T>> {
        &self.objective
    }

    pub fn value(&self, x: &[T], y: &[T]) -> T {
        self.objective.value(x, y)
    }
    pub fn grad_x(&self, x: &[T], y: &[T]) -> Vec<T> {
        self.objective.grad_x(x, y)
    }
    pub fn grad_y(&self, x: &[T], y: &[T]) -> Vec<T> {
        self.objective.grad_y(x, y)
    }

    /// Checks the dimensions of a point pair.
    pub fn check_point(&self, x: &[T], y: &[T]) -> Result<()> {
        if x.len() != self.dim_x {
            return Err(Error::Shape {
                context: "x",
                expected: self.dim_x,
                got: x.len(),
            });
        }
        if y.len() != self.dim_y {
            return Err(Error::Shape {
                context: "y",
                expected: self.dim_y,
                got: y.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn ensure_feasible(&self, x: &[T], y: &[T]) -> Result<()> {
        self.check_point(x, y)?;
        self.set_x.ensure_contains(x)?;
        self.set_y.ensure_contains(y)
    }
}

pub(crate) fn numeric_error<T: Scalar>(what: &str, x: &[T], y: &[T]) -> Error {
    Error::Numeric {
        what: what.to_string(),
        x: x.iter().map(|v| v.to_f64_lossy()).collect(),
        y: y.iter().map(|v| v.to_f64_lossy()).collect(),
    }
}

/// Oracle front-end that counts evaluations and rejects non-finite output.
///
/// One gradient call is one evaluation of either `∇_x f` or `∇_y f`; value
/// evaluations are counted separately. Re-querying the point of an oracle's
/// previous call (an accepted trial's `∇_y f(x', y')` is the next iterate's
/// `∇_y f`) costs nothing.
pub struct CountingOracle<'a, T: Scalar> {
    problem: &'a MinimaxProblem<T>,
    grad_calls: Cell<u64>,
    f_calls: Cell<u64>,
    last_value: Memo<T, T>,
    last_grad_x: Memo<T, Vec<T>>,
    last_grad_y: Memo<T, Vec<T>>,
}

/// The most recent `(x, y) → output` pair of one oracle. A repeat query at a
/// bitwise-identical point is answered from here and not counted again.
type Entry<T, O> = (Vec<T>, Vec<T>, O);

struct Memo<T, O>(RefCell<Option<Entry<T, O>>>);

impl<T: Scalar, O: Clone> Memo<T, O> {
    fn new() -> Self {
        Memo(RefCell::new(None))
    }

    fn get(&self, x: &[T], y: &[T]) -> Option<O> {
        let same = |a: &[T], b: &[T]| {
            a.len() == b.len() && a.iter().zip(b).all(|(p, q)| p.to_f64_lossy().to_bits() == q.to_f64_lossy().to_bits())
        };
        match &*self.0.borrow() {
            Some((mx, my, out)) if same(mx, x) && same(my, y) => Some(out.clone()),
            _ => None,
        }
    }

    fn put(&self, x: &[T], y: &[T], out: O) {
        *self.0.borrow_mut() = Some((x.to_vec(), y.to_vec(), out));
    }
}

impl<'a, T: Scalar> CountingOracle<'a, T> {
    pub fn new(problem: &'a MinimaxProblem<T>) -> Self {
        CountingOracle {
            problem,
            grad_calls: Cell::new(0),
            f_calls: Cell::new(0),
            last_value: Memo::new(),
            last_grad_x: Memo::new(),
            last_grad_y: Memo::new(),
        }
    }

    pub fn problem(&self) -> &'a MinimaxProblem<T> {
        self.problem
    }

    pub fn grad_calls(&self) -> u64 {
        self.grad_calls.get()
    }

    pub fn f_calls(&self) -> u64 {
        self.f_calls.get()
    }

    pub fn value(&self, x: &[T], y: &[T]) -> Result<T> {
        if let Some(v) = self.last_value.get(x, y) {
            return Ok(v);
        }
        self.f_calls.set(self.f_calls.get() + 1);
        let v = self.problem.value(x, y);
        if v.is_finite() {
            self.last_value.put(x, y, v);
            Ok(v)
        } else {
            Err(numeric_error("objective value", x, y))
        }
    }

    pub fn grad_x(&self, x: &[T], y: &[T]) -> Result<Vec<T>> {
        if let Some(g) = self.last_grad_x.get(x, y) {
            return Ok(g);
        }
        self.grad_calls.set(self.grad_calls.get() + 1);
        let g = self.problem.grad_x(x, y);
        if g.len() != self.problem.dim_x() {
            return Err(Error::Shape {
                context: "grad_x output",
                expected: self.problem.dim_x(),
                got: g.len(),
            });
        }
        if vector::all_finite(&g) {
            self.last_grad_x.put(x, y, g.clone());
            Ok(g)
        } else {
            Err(numeric_error("grad_x", x, y))
        }
    }

    pub fn grad_y(&self, x: &[T], y: &[T]) -> Result<Vec<T>> {
        if let Some(g) = self.last_grad_y.get(x, y) {
            return Ok(g);
        }
        self.grad_calls.set(self.grad_calls.get() + 1);
        let g = self.problem.grad_y(x, y);
        if g.len() != self.problem.dim_y() {
            return Err(Error::Shape {
                context: "grad_y output",
                expected: self.problem.dim_y(),
                got: g.len(),
            });
        }
        if vector::all_finite(&g) {
            self.last_grad_y.put(x, y, g.clone());
            Ok(g)
        } else {
            Err(numeric_error("grad_y", x, y))
        }
    }
}

/// Projected-gradient stationarity measure at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarityGap<T> {
    pub gap_x: Vec<T>,
    pub gap_y: Vec<T>,
    /// Euclidean norm of `(gap_x, gap_y)`.
    pub norm: T,
}

impl<T: Scalar> StationarityGap<T> {
    pub fn norm_x(&self) -> T {
        vector::norm(&self.gap_x)
    }
    pub fn norm_y(&self) -> T {
        vector::norm(&self.gap_y)
    }
}

/// Builds the gap from already-evaluated partial gradients:
/// `gap_x = β (x − P_X(x − ∇_x f/β))`, `gap_y = γ (y − P_Y(y + ∇_y f/γ))`.
#[allow(clippy::too_many_arguments)]
pub fn gap_from_gradients<T: Scalar>(
    set_x: &FeasibleSet<T>,
    set_y: &FeasibleSet<T>,
    x: &[T],
    grad_x: &[T],
    y: &[T],
    grad_y: &[T],
    beta: T,
    gamma: T,
) -> Result<StationarityGap<T>> {
    let gap_x = side_gap(set_x, x, grad_x, -beta)?;
    let gap_y = side_gap(set_y, y, grad_y, gamma)?;
    let norm = vector::joint_norm(&gap_x, &gap_y);
    Ok(StationarityGap { gap_x, gap_y, norm })
}

/// `|s| (v − P(v + g/s))`, with the sign of `s` choosing descent or ascent.
/// On an unconstrained set this is `∓g` algebraically, so `g` is returned as
/// is rather than through the rounding of the round trip.
fn side_gap<T: Scalar>(set: &FeasibleSet<T>, v: &[T], g: &[T], s: T) -> Result<Vec<T>> {
    if g.len() != v.len() {
        return Err(Error::Shape {
            context: "gradient length",
            expected: v.len(),
            got: g.len(),
        });
    }
    if let FeasibleSet::Unconstrained { dim } = set {
        if *dim != v.len() {
            return Err(Error::Shape {
                context: "point dimension",
                expected: *dim,
                got: v.len(),
            });
        }
        return Ok(if s < T::zero() { g.to_vec() } else { vector::scale(-T::one(), g) });
    }
    let p = set.project(&vector::axpy(v, s.recip(), g))?;
    Ok(vector::scale(s.abs(), &vector::sub(v, &p)))
}

/// `∇_y f − c·y`, the y-gradient of `f − (c/2)‖y‖²`. Returns the input
/// unchanged when `c == 0`.
pub(crate) fn regularize_grad_y<T: Scalar>(grad_y: &[T], y: &[T], c: T) -> Vec<T> {
    if c == T::zero() {
        grad_y.to_vec()
    } else {
        vector::axpy(grad_y, -c, y)
    }
}

fn check_steps<T: Scalar>(beta: T, gamma: T) -> Result<()> {
    if !(beta > T::zero()) || !beta.is_finite() {
        return Err(Error::Parameter(format!("beta must be positive, got {beta}")));
    }
    if !(gamma > T::zero()) || !gamma.is_finite() {
        return Err(Error::Parameter(format!("gamma must be positive, got {gamma}")));
    }
    Ok(())
}

/// Stationarity gap of `f` at `(x, y)` with step parameters `β`, `γ`.
pub fn stationarity_gap<T: Scalar>(
    problem: &MinimaxProblem<T>,
    x: &[T],
    y: &[T],
    beta: T,
    gamma: T,
) -> Result<StationarityGap<T>> {
    regularized_gap(problem, x, y, beta, gamma, T::zero())
}

/// Stationarity gap of `f_c(x, y) = f(x, y) − (c/2)‖y‖²`.
pub fn regularized_gap<T: Scalar>(
    problem: &MinimaxProblem<T>,
    x: &[T],
    y: &[T],
    beta: T,
    gamma: T,
    c: T,
) -> Result<StationarityGap<T>> {
    check_steps(beta, gamma)?;
    if !(c >= T::zero()) || !c.is_finite() {
        return Err(Error::Parameter(format!("c must be nonnegative, got {c}")));
    }
    problem.ensure_feasible(x, y)?;
    let oracle = CountingOracle::new(problem);
    let gx = oracle.grad_x(x, y)?;
    let gy = regularize_grad_y(&oracle.grad_y(x, y)?, y, c);
    gap_from_gradients(problem.set_x(), problem.set_y(), x, &gx, y, &gy, beta, gamma)
}

/// Largest central-difference discrepancy found by [`check_gradients`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientCheckReport {
    pub points_checked: usize,
    pub max_rel_error_x: f64,
    pub max_rel_error_y: f64,
    /// `(point index, coordinate)` of the worst x-partial, if any were checked.
    pub worst_x: Option<(usize, usize)>,
    pub worst_y: Option<(usize, usize)>,
}

impl GradientCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.max_rel_error_x.max(self.max_rel_error_y)
    }
}

/// Finite-difference step `base · max(1, |v|)`.
#[inline]
pub fn fd_step<T: Scalar>(base: T, v: T) -> T {
    base * T::one().max(v.abs())
}

/// Compares the analytic partial gradients against central differences of
/// the value oracle at each sample point.
///
/// Relative error is `|analytic − fd| / max(1, |analytic|, |fd|)`. The step
/// for coordinate `v` is `h · max(1, |v|)`; `h = 1e-6` is the usual choice.
pub fn check_gradients<T: Scalar>(
    problem: &MinimaxProblem<T>,
    sample_points: &[(Vec<T>, Vec<T>)],
    h: T,
) -> Result<GradientCheckReport> {
    if !(h > T::zero()) {
        return Err(Error::Parameter(format!("finite-difference step must be positive, got {h}")));
    }
    let mut report = GradientCheckReport {
        points_checked: 0,
        max_rel_error_x: 0.0,
        max_rel_error_y: 0.0,
        worst_x: None,
        worst_y: None,
    };
    let oracle = CountingOracle::new(problem);
    let two = T::lit(2.0);

    for (p, (x, y)) in sample_points.iter().enumerate() {
        problem.check_point(x, y)?;
        let gx = oracle.grad_x(x, y)?;
        let gy = oracle.grad_y(x, y)?;

        let mut xp = x.clone();
        for i in 0..x.len() {
            let step = fd_step(h, x[i]);
            xp[i] = x[i] + step;
            let fp = oracle.value(&xp, y)?;
            xp[i] = x[i] - step;
            let fm = oracle.value(&xp, y)?;
            xp[i] = x[i];
            let fd = ((fp - fm) / (two * step)).to_f64_lossy();
            let err = rel_error(gx[i].to_f64_lossy(), fd);
            if report.worst_x.is_none() || err > report.max_rel_error_x {
                report.max_rel_error_x = err;
                report.worst_x = Some((p, i));
            }
        }

        let mut yp = y.clone();
        for j in 0..y.len() {
            let step = fd_step(h, y[j]);
            yp[j] = y[j] + step;
            let fp = oracle.value(x, &yp)?;
            yp[j] = y[j] - step;
            let fm = oracle.value(x, &yp)?;
            yp[j] = y[j];
            let fd = ((fp - fm) / (two * step)).to_f64_lossy();
            let err = rel_error(gy[j].to_f64_lossy(), fd);
            if report.worst_y.is_none() || err > report.max_rel_error_y {
                report.max_rel_error_y = err;
                report.worst_y = Some((p, j));
            }
        }
        report.points_checked += 1;
    }
    Ok(report)
}

fn rel_error(analytic: f64, fd: f64) -> f64 {
    (analytic - fd).abs() / 1f64.max(analytic.abs()).max(fd.abs())
}
