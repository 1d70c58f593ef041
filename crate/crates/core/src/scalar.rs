//! Scalar abstraction shared by the linear algebra, Lorentz and form code.
//!
//! Everything geometric is written against [`Scalar`]. The exact pipeline
//! instantiates it with [`FieldElement`](crate::FieldElement) or
//! [`BigRational`](num_rational::BigRational); `f64` is supported for quick
//! floating-point views of the same computations.

use std::fmt::Debug;
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Sign of a real number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of_i32(v: i32) -> Sign {
        match v.cmp(&0) {
            std::cmp::Ordering::Less => Sign::Negative,
            std::cmp::Ordering::Equal => Sign::Zero,
            std::cmp::Ordering::Greater => Sign::Positive,
        }
    }

    pub fn to_i32(self) -> i32 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign::of_i32(self.to_i32() * rhs.to_i32())
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        Sign::of_i32(-self.to_i32())
    }
}

/// An ordered field, as far as the algorithms here need one.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Sign of the real value.
    fn sign(&self) -> Sign;

    fn from_rational(r: &BigRational) -> Self;

    fn to_f64(&self) -> f64;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Returns the value as a rational when it lies in the prime field.
    fn as_rational(&self) -> Option<BigRational>;

    fn is_negative(&self) -> bool {
        self.sign() == Sign::Negative
    }

    fn is_positive(&self) -> bool {
        self.sign() == Sign::Positive
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }
}

/// Scalars with decidable equality, usable as hash keys.
pub trait ExactScalar: Scalar + Eq + Hash {}

/// Magnitudes below this count as zero for `f64`.
pub const F64_ZERO_TOLERANCE: f64 = 1e-12;

impl Scalar for f64 {
    fn sign(&self) -> Sign {
        if *self > F64_ZERO_TOLERANCE {
            Sign::Positive
        } else if *self < -F64_ZERO_TOLERANCE {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn as_rational(&self) -> Option<BigRational> {
        BigRational::from_float(*self)
    }
}

impl Scalar for BigRational {
    fn sign(&self) -> Sign {
        if self.is_zero() {
            Sign::Zero
        } else if Signed::is_positive(self) {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn as_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }
}

impl ExactScalar for BigRational {}
