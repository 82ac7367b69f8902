//! Floating-point scalar abstraction shared by every numeric routine.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar used throughout the crate: `f32` or `f64`.
///
/// Tolerances quoted in the documentation assume `f64`; the `f32`
/// instantiation is useful for quick sweeps but cannot reach the oracle
/// tolerances.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts an integer count into the scalar type.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Lossy view as `f64`, used for error reporting and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Base-2 logarithm with the `0·log 0 = 0` convention folded in: returns
    /// `x·log₂(x/y)` and treats `x = 0` as contributing nothing.
    #[inline]
    fn xlog2(x: Self, y: Self) -> Self {
        if x == Self::zero() {
            Self::zero()
        } else {
            x * (x / y).log2()
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}
