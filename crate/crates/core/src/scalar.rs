//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftNum;

/// Floating point scalar the physics is written against: `f32` or `f64`.
pub trait Real: Float + FloatConst + FromPrimitive + FftNum + Debug + Display + Default {}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

#[inline]
pub(crate) fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub(crate) fn from_usize<T: Real>(x: usize) -> T {
    T::from_usize(x).expect("count representable in scalar type")
}
