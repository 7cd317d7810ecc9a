//! Scalar abstraction shared by every numeric module.
//!
//! The metric pipeline only needs ordinary floating-point arithmetic plus a
//! square root, so it is written once against [`Scalar`] and instantiated for
//! `f32` and `f64`. Exact rational types are not supported: Euclidean
//! distances and standard deviations leave the rationals.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + FromStr + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Every literal used by the crate is
    /// representable (possibly rounded) in both supported widths.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// A 3-vector of joint coordinates in millimetres.
pub type Vec3<T> = [T; 3];

pub(crate) fn sub3<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn norm_sq3<T: Scalar>(a: &Vec3<T>) -> T {
    a[0] * a[0] + a[1] * a[1] + a[2] * a[2]
}

pub(crate) fn norm3<T: Scalar>(a: &Vec3<T>) -> T {
    norm_sq3(a).sqrt()
}
