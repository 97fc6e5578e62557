//! Feasible sets and their exact Euclidean projections.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vector;

/// A closed convex feasible set with a closed-form projection.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet<T> {
    /// All of ℝⁿ.
    Unconstrained { dim: usize },
    /// Componentwise bounds `lower ≤ v ≤ upper`.
    Box { lower: Vec<T>, upper: Vec<T> },
    /// Closed Euclidean ball.
    Ball { center: Vec<T>, radius: T },
    /// Probability simplex `{v ≥ 0, Σ v = 1}`.
    Simplex { dim: usize },
}

impl<T: Scalar> FeasibleSet<T> {
    pub fn unconstrained(dim: usize) -> Self {
        FeasibleSet::Unconstrained { dim }
    }

    pub fn boxed(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Shape {
                context: "box bounds",
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::Parameter("box must have dimension >= 1".into()));
        }
        if let Some(i) = lower
            .iter()
            .zip(&upper)
            .position(|(&l, &u)| !(l <= u) || l.is_nan() || u.is_nan())
        {
            return Err(Error::Parameter(format!(
                "box lower bound exceeds upper bound at coordinate {i}"
            )));
        }
        Ok(FeasibleSet::Box { lower, upper })
    }

    /// Symmetric box `[-half_width, half_width]^dim`.
    pub fn cube(dim: usize, half_width: T) -> Result<Self> {
        Self::boxed(vec![-half_width; dim], vec![half_width; dim])
    }

    pub fn ball(center: Vec<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::Parameter(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        if center.is_empty() {
            return Err(Error::Parameter("ball must have dimension >= 1".into()));
        }
        Ok(FeasibleSet::Ball { center, radius })
    }

    pub fn simplex(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("simplex dimension must be >= 1".into()));
        }
        Ok(FeasibleSet::Simplex { dim })
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::Unconstrained { dim } | FeasibleSet::Simplex { dim } => *dim,
            FeasibleSet::Box { lower, .. } => lower.len(),
            FeasibleSet::Ball { center, .. } => center.len(),
        }
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            FeasibleSet::Unconstrained { .. } => false,
            FeasibleSet::Box { lower, upper } => lower
                .iter()
                .chain(upper.iter())
                .all(|v| v.is_finite()),
            _ => true,
        }
    }

    fn check_dim(&self, v: &[T]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::Shape {
                context: "projection input",
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, v: &[T]) -> Result<Vec<T>> {
        self.check_dim(v)?;
        Ok(match self {
            FeasibleSet::Unconstrained { .. } => v.to_vec(),
            FeasibleSet::Box { lower, upper } => v
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&x, (&l, &u))| x.max(l).min(u))
                .collect(),
            FeasibleSet::Ball { center, radius } => {
                let offset = vector::sub(v, center);
                let r = vector::norm(&offset);
                if r <= *radius {
                    v.to_vec()
                } else {
                    vector::axpy(center, *radius / r, &offset)
                }
            }
            FeasibleSet::Simplex { .. } => project_simplex(v),
        })
    }

    /// `max ‖a − b‖` over the set; infinite for unbounded sets.
    pub fn diameter(&self) -> T {
        match self {
            FeasibleSet::Unconstrained { .. } => T::infinity(),
            FeasibleSet::Box { lower, upper } => vector::dist(upper, lower),
            FeasibleSet::Ball { radius, .. } => T::lit(2.0) * *radius,
            FeasibleSet::Simplex { dim } => {
                if *dim >= 2 {
                    T::lit(2.0).sqrt()
                } else {
                    T::zero()
                }
            }
        }
    }

    /// `max ‖v‖` over the set; infinite for unbounded sets.
    pub fn max_norm(&self) -> T {
        match self {
            FeasibleSet::Unconstrained { .. } => T::infinity(),
            FeasibleSet::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .fold(T::zero(), |acc, (&l, &u)| {
                    let m = l.abs().max(u.abs());
                    acc + m * m
                })
                .sqrt(),
            FeasibleSet::Ball { center, radius } => vector::norm(center) + *radius,
            FeasibleSet::Simplex { .. } => T::one(),
        }
    }

    /// Membership test with absolute tolerance `tol`.
    pub fn contains(&self, v: &[T], tol: T) -> bool {
        if v.len() != self.dim() || !vector::all_finite(v) {
            return false;
        }
        match self {
            FeasibleSet::Unconstrained { .. } => true,
            FeasibleSet::Box { lower, upper } => v
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(&x, (&l, &u))| x >= l - tol && x <= u + tol),
            FeasibleSet::Ball { center, radius } => vector::dist(v, center) <= *radius + tol,
            FeasibleSet::Simplex { dim } => {
                let sum = v.iter().fold(T::zero(), |a, &b| a + b);
                v.iter().all(|&x| x >= -tol) && (sum - T::one()).abs() <= tol * T::count(*dim)
            }
        }
    }

    /// Errors unless `v` lies in the set up to a small tolerance.
    pub fn ensure_contains(&self, v: &[T]) -> Result<()> {
        self.check_dim(v)?;
        let scale = T::one() + v.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
        let tol = T::lit(1e-9).max(T::epsilon() * T::lit(64.0)) * scale;
        if self.contains(v, tol) {
            Ok(())
        } else {
            Err(Error::Infeasible {
                set: self.to_string(),
                detail: format!("{v:?}"),
            })
        }
    }
}

impl<T: Scalar> fmt::Display for FeasibleSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeasibleSet::Unconstrained { dim } => write!(f, "R^{dim}"),
            FeasibleSet::Box { lower, .. } => write!(f, "box({})", lower.len()),
            FeasibleSet::Ball { center, radius } => {
                write!(f, "ball(dim {}, radius {radius})", center.len())
            }
            FeasibleSet::Simplex { dim } => write!(f, "simplex({dim})"),
        }
    }
}

/// Sort-and-threshold projection onto the probability simplex.
///
/// Finds the largest `k` with `u_k > (Σ_{j≤k} u_j − 1)/k` over the
/// descending-sorted coordinates and shifts by that threshold. Ties in the
/// sorted order give the same threshold.
pub fn project_simplex<T: Scalar>(v: &[T]) -> Vec<T> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));

    let mut prefix = T::zero();
    let mut threshold = T::zero();
    for (i, &u) in sorted.iter().enumerate() {
        prefix = prefix + u;
        let t = (prefix - T::one()) / T::count(i + 1);
        if u > t {
            threshold = t;
        }
    }
    v.iter().map(|&x| (x - threshold).max(T::zero())).collect()
}
