//! Numeric abstractions shared by every module.
//!
//! [`Scalar`] is the minimal ring-like interface the event-matrix and
//! rearrangement code needs: addition, subtraction, ordering and a notion of
//! rounding slack. It is implemented for `f32`, `f64` and [`Rational64`], so
//! the combinatorial search can be run in exact arithmetic.
//!
//! [`Real`] adds the transcendental functions needed by jump detection and
//! portfolio estimation and is implemented for `f32` and `f64` only.

use std::fmt::Debug;
use std::ops::Neg;

use num_rational::Rational64;
use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

pub trait Scalar:
    Copy + PartialOrd + Num + Neg<Output = Self> + ToPrimitive + Debug + Send + Sync + 'static
{
    /// Relative rounding error of one arithmetic operation; zero for exact types.
    fn unit_roundoff() -> Self;

    /// Converts a small integer count into the scalar type.
    fn from_count(n: usize) -> Self;

    fn abs_val(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }

    fn max_val(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_val(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Lossy conversion used for reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn unit_roundoff() -> Self {
        f64::EPSILON
    }

    fn from_count(n: usize) -> Self {
        n as f64
    }
}

impl Scalar for f32 {
    fn unit_roundoff() -> Self {
        f32::EPSILON
    }

    fn from_count(n: usize) -> Self {
        n as f32
    }
}

impl Scalar for Rational64 {
    fn unit_roundoff() -> Self {
        Rational64::from_integer(0)
    }

    fn from_count(n: usize) -> Self {
        Rational64::from_integer(n as i64)
    }
}

/// Floating point scalar: `f32` or `f64`.
pub trait Real: Scalar + Float + FromPrimitive {
    /// Converts an `f64` constant into `Self`.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Sum with a fixed left-to-right evaluation order.
pub fn ordered_sum<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    values.into_iter().fold(T::zero(), |acc, v| acc + v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_is_exact() {
        let a = Rational64::new(1, 3);
        assert_eq!(a + a + a, Rational64::from_integer(1));
        assert_eq!(Rational64::unit_roundoff(), Rational64::from_integer(0));
        assert_eq!((-a).abs_val(), a);
    }

    #[test]
    fn min_max_helpers() {
        assert_eq!(2.0f64.max_val(3.0), 3.0);
        assert_eq!(2.0f64.min_val(3.0), 2.0);
        assert_eq!((-1.5f32).abs_val(), 1.5);
        assert_eq!(f64::lit(0.25), 0.25);
    }
}
