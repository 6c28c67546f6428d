use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};
use rand::Rng;
use rand_distr::StandardNormal;

/// Floating-point scalar the analytic models are written against.
///
/// Implemented for `f32` and `f64`. The Monte Carlo layer and every
/// tolerance quoted in this crate assume `f64`; the `f32` instantiation is
/// useful for quick evaluations of the closed forms.
pub trait Real:
    Float + FloatConst + FromPrimitive + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` constant into `Self`, rounding if needed.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// One draw from N(0, 1).
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Real for f32 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Real for f64 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}
