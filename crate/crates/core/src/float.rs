//! Scalar abstraction for the analytic core.

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the transform machinery is generic over.
pub trait Scalar: Float + FromPrimitive + std::fmt::Debug + std::fmt::Display + 'static {}

impl<T> Scalar for T where T: Float + FromPrimitive + std::fmt::Debug + std::fmt::Display + 'static {}

/// Lift an `f64` constant into the scalar type.
#[inline]
pub fn lit<F: Scalar>(x: f64) -> F {
    F::from_f64(x).expect("constant not representable in scalar type")
}

/// Lift a nonnegative integer into the scalar type.
#[inline]
pub fn int<F: Scalar>(n: usize) -> F {
    F::from_usize(n).expect("integer not representable in scalar type")
}
