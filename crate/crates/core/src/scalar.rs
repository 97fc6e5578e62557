//! Scalar abstraction shared by every solver and problem.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point field the library computes in: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    /// Converts a count into the scalar type.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Widens to `f64` for reporting and serialization.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative slack used when testing the backtracking conditions: a condition
    /// value `v` is treated as satisfied when `v <= rel * (1 + |f|)`.
    fn condition_slack() -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn condition_slack() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    #[inline]
    fn condition_slack() -> Self {
        // 1e-12 is below f32 resolution; use a few ulps of 1.0 instead.
        8.0 * f32::EPSILON
    }
}
