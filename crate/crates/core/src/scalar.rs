use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst};
use rustfft::FftNum;

/// Floating-point type the physics layer is generic over: `f32` or `f64`.
///
/// `Float` and `Signed` (pulled in through `FftNum`) both define `abs` and
/// `signum`, so call those as `Float::abs(x)` inside generic code.
pub trait Scalar: Float + FloatConst + FftNum + Debug + Display + Default {
    /// Converts an `f64` literal into `Self`.
    fn lit(x: f64) -> Self {
        num_traits::cast(x).expect("f64 literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        num_traits::cast(self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
