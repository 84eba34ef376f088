//! The real scalar abstraction shared by the analytic modules.
//!
//! Closed-form results (mean-field intensities, recurrence distributions,
//! hypergeometric sums, sensing factors) are written once against [`Real`]
//! and work for `f32` and `f64`. The Liouvillian numerics are fixed to
//! `f64` because the sparse factorization backend is.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point type usable by the analytic modules.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
}

/// Converts an `f64` constant into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal is representable in every Real type")
}

/// Converts a count or level index into `T`.
#[inline]
pub fn from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("level index is representable in every Real type")
}

/// Relative closeness test used for boundary-manifold detection.
#[inline]
pub fn rel_close<T: Real>(a: T, b: T, rel: T) -> bool {
    let scale = a.abs().max(b.abs());
    (a - b).abs() <= rel * scale
}
