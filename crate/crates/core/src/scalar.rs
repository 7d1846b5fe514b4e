//! Scalar abstraction shared by the integrators and the dynamics layer.
//!
//! Everything that has to run in both native and extended precision is written
//! against [`Real`]. The trait sits on top of the `num-traits` arithmetic
//! traits and adds the handful of transcendental functions the simulator
//! needs, so that a double-double type does not have to provide the whole of
//! `num_traits::Float`.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_traits::{FromPrimitive, Num, NumAssignOps, ToPrimitive};

pub trait Real:
    Copy
    + Debug
    + Display
    + Default
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Num
    + NumAssignOps
    + Neg<Output = Self>
    + FromPrimitive
    + ToPrimitive
{
    /// Bits in the significand (53 for `f64`, 106 for double-double).
    const SIGNIFICAND_BITS: u32;

    /// Converts a native double; exact for every supported type.
    fn lit(v: f64) -> Self;

    /// Leading `f64` approximation.
    fn approx(self) -> f64;

    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn sin_cos(self) -> (Self, Self);
    fn epsilon() -> Self;
    fn pi() -> Self;
    fn is_finite(self) -> bool;

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { Self::one() / self } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base *= base;
            e >>= 1;
        }
        acc
    }
}

macro_rules! impl_native {
    ($t:ty, $bits:expr) => {
        impl Real for $t {
            const SIGNIFICAND_BITS: u32 = $bits;

            #[inline]
            fn lit(v: f64) -> Self {
                v as $t
            }
            #[inline]
            fn approx(self) -> f64 {
                self as f64
            }
            #[inline]
            fn sqrt(self) -> Self {
                num_traits::Float::sqrt(self)
            }
            #[inline]
            fn abs(self) -> Self {
                num_traits::Float::abs(self)
            }
            #[inline]
            fn sin_cos(self) -> (Self, Self) {
                num_traits::Float::sin_cos(self)
            }
            #[inline]
            fn epsilon() -> Self {
                <$t>::EPSILON
            }
            #[inline]
            fn pi() -> Self {
                num_traits::FloatConst::PI()
            }
            #[inline]
            fn is_finite(self) -> bool {
                num_traits::Float::is_finite(self)
            }
        }
    };
}

impl_native!(f32, 24);
impl_native!(f64, 53);

#[cfg(test)]
mod tests {
    use super::*;

    fn hypot<T: Real>(a: T, b: T) -> T {
        (a * a + b * b).sqrt()
    }

    #[test]
    fn generic_code_runs_on_both_native_widths() {
        assert_eq!(hypot(3.0f32, 4.0f32), 5.0);
        assert_eq!(hypot(3.0f64, 4.0f64), 5.0);
    }

    #[test]
    fn powi_matches_repeated_multiplication() {
        assert_eq!(Real::powi(1.5f64, 3), 3.375);
        assert_eq!(Real::powi(2.0f64, -2), 0.25);
        assert_eq!(Real::powi(7.0f64, 0), 1.0);
    }
}
