use crate::error::Result;
use crate::problem::{FnObjective, MinimaxProblem};
use crate::projections::FeasibleSet;
use crate::scalar::Scalar;

/// Default half-width of the box replacing `Y = ℝ`.
pub const DIRAC_GAN_Y_BOX: f64 = 10.0;

/// `log(1 + e^t)` without overflow.
fn softplus<T: Scalar>(t: T) -> T {
    if t > T::zero() {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn sigmoid<T: Scalar>(t: T) -> T {
    if t >= T::zero() {
        T::one() / (T::one() + (-t).exp())
    } else {
        let e = t.exp();
        e / (T::one() + e)
    }
}

/// `L(x, y) = −log(1 + exp(−xy)) + log 2` with `Y = [−10, 10]`.
pub fn make_dirac_gan<T: Scalar>() -> Result<MinimaxProblem<T>> {
    make_dirac_gan_with_box(Some(T::lit(DIRAC_GAN_Y_BOX)))
}

/// Dirac-GAN with `Y = [−h, h]`, or `Y = ℝ` for `None`.
pub fn make_dirac_gan_with_box<T: Scalar>(half_width: Option<T>) -> Result<MinimaxProblem<T>> {
    let obj = FnObjective::new(
        |x: &[T], y: &[T]| -softplus(-x[0] * y[0]) + T::lit(std::f64::consts::LN_2),
        |x: &[T], y: &[T]| vec![y[0] * sigmoid(-x[0] * y[0])],
        |x: &[T], y: &[T]| vec![x[0] * sigmoid(-x[0] * y[0])],
    );
    let p = MinimaxProblem::new("dirac-gan", 1, 1, obj)?;
    match half_width {
        Some(h) => p.with_set_y(FeasibleSet::cube(1, h)?),
        None => Ok(p),
    }
}
