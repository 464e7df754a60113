//! Scalar abstractions shared by the pointwise algebra and the polynomial calculus.
//!
//! [`Scalar`] is a commutative ring that contains the rationals: enough for
//! every linear identity (sym, skew, dev, cross products) and therefore also
//! implemented by polynomials. [`Field`] adds division, an order and a
//! lossy conversion to `f64`, which is what norms and bounds need.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Arbitrary-precision rational number used for all exact computations.
pub type Rational = BigRational;

/// Absolute tolerance used by the floating instantiation for zero tests.
pub const F64_ZERO_TOL: f64 = 1e-12;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// The rational number `num / den` embedded into the ring.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Exact equality with zero for exact types, `|x| < 1e-12` for `f64`.
    fn is_negligible(&self) -> bool;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }
}

pub trait Field: Scalar + Div<Output = Self> + PartialOrd {
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn is_negligible(&self) -> bool {
        self.abs() < F64_ZERO_TOL
    }
}

impl Field for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for Rational {
    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
}

impl Field for Rational {
    fn to_f64(&self) -> f64 {
        // numer/denom separately overflow for huge values; fall back to a scaled quotient.
        match (self.numer().to_f64(), self.denom().to_f64()) {
            (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
            _ => {
                let shift = self.numer().bits().max(self.denom().bits()).saturating_sub(900);
                let n = (self.numer() >> shift).to_f64().unwrap_or(f64::NAN);
                let d = (self.denom() >> shift).to_f64().unwrap_or(f64::NAN);
                n / d
            }
        }
    }
}

/// Shorthand for an exact rational `num / den`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::from_ratio(num, den)
}

/// Exact rational from a finite `f64` (every finite double is a dyadic rational).
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_embedding_is_exact() {
        assert_eq!(rat(2, 4), rat(1, 2));
        assert!(rat(0, 7).is_negligible());
        assert!(!rat(1, 1_000_000_000).is_negligible());
        assert_eq!(Rational::from_int(3), rat(6, 2));
    }

    #[test]
    fn float_tolerance_is_absolute() {
        assert!(1e-13_f64.is_negligible());
        assert!(!1e-11_f64.is_negligible());
    }

    #[test]
    fn huge_rational_converts() {
        // does not reduce, and both parts overflow f64
        let big = Rational::new(BigInt::from(10).pow(400) + 1, BigInt::from(10).pow(399) * 4);
        assert!((Field::to_f64(&big) - 2.5).abs() < 1e-12);
    }
}
