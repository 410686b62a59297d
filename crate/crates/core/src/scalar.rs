//! Floating-point scalar abstraction.
//!
//! All core math is generic over [`Real`], implemented for `f32` and `f64`.
//! The stated accuracy targets of this crate (1e-12 .. 1e-14) are only
//! reachable with `f64`; the `f32` instantiation exists for callers that
//! trade accuracy for size.

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point scalar used throughout the crate: `f32` or `f64`.
pub trait Real:
    'static
    + Send
    + Sync
    + Float
    + FloatConst
    + FromPrimitive
    + core::fmt::Debug
    + core::fmt::Display
    + core::fmt::LowerExp
{
    /// Largest finite value of the type (saturation limit for log-space carry).
    fn max_finite() -> Self {
        Self::max_value()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for converting an `f64` constant into the scalar type.
#[inline]
pub fn real<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("f64 constant convertible to scalar")
}
