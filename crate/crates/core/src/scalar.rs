//! Scalar abstractions.
//!
//! Geometry and analysis run over any IEEE float implementing [`Real`]
//! (`f32`, `f64`). Exponent algebra only needs field operations and is
//! generic over [`Field`], which also admits exact rationals.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};
use rustfft::FftNum;

/// Floating point scalar used by every grid computation.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Default
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for the built-in float types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Ordered field: enough structure for exponent bookkeeping.
pub trait Field: Clone + Num + PartialOrd + FromPrimitive + Debug + Display {}

impl<F: Clone + Num + PartialOrd + FromPrimitive + Debug + Display> Field for F {}

/// Sum in index order. Every reduction over grid data goes through here so
/// results never depend on thread scheduling.
#[inline]
pub fn ordered_sum<T: Real, I: IntoIterator<Item = T>>(it: I) -> T {
    it.into_iter().fold(T::zero(), |acc, x| acc + x)
}

/// Largest element, NaN-free input assumed; empty input gives zero.
#[inline]
pub fn max_of<T: Real, I: IntoIterator<Item = T>>(it: I) -> T {
    it.into_iter().fold(T::zero(), |acc, x| if x > acc { x } else { acc })
}
