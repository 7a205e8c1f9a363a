//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, Open01, StandardNormal};

/// Floating point type the library can compute in: `f32` or `f64`.
///
/// Accuracy targets quoted in the docs assume `f64`; `f32` is supported for
/// throughput-bound work such as path sampling.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + 'static
{
    /// Magnitude above which growing ODE solutions are renormalized.
    const RESCALE_THRESHOLD: Self;

    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Uniform sample on the open interval (0, 1).
    fn sample_open01<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Real for f64 {
    const RESCALE_THRESHOLD: Self = 1e250;

    #[inline]
    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    #[inline]
    fn sample_open01<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Open01.sample(rng)
    }
}

impl Real for f32 {
    const RESCALE_THRESHOLD: Self = 1e30;

    #[inline]
    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    #[inline]
    fn sample_open01<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Open01.sample(rng)
    }
}

/// Converts an `f64` literal into `T`.
#[inline(always)]
pub fn c<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in target float")
}

/// Converts a count into `T`.
#[inline(always)]
pub fn cu<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in target float")
}

#[inline(always)]
pub(crate) fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
