//! Scalar abstraction: all simulator math is generic over `f32`/`f64`.

use nalgebra::RealField;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rand::Rng;
use rand_distr::StandardNormal;

/// Floating-point scalar: `f32` or `f64`.
///
/// Combines the `num-traits` float hierarchy with nalgebra's [`RealField`] so
/// the same code drives both plain arithmetic and the dense linear algebra.
/// Several method names exist in both hierarchies; generic code disambiguates
/// with `Float::sin(x)`-style calls.
pub trait Real:
    Float + FloatConst + NumAssign + FromPrimitive + RealField + Copy + Send + Sync + 'static
{
    /// One draw from the standard normal distribution N(0, 1).
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Real for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Real for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

/// Converts an `f64` literal or intermediate into the working scalar type.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 value representable in scalar type")
}

/// Lossy widening back to `f64` (exact for `f64`, rounded for `f32`).
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    num_traits::ToPrimitive::to_f64(&x).expect("scalar convertible to f64")
}
