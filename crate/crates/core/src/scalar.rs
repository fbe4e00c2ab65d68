//! Scalar types for exact matrix computation.
//!
//! Everything downstream (elimination, ranks, canonical forms) assumes exact
//! field arithmetic: equality of scalars must be decidable and exact. The
//! production scalar is [`GaussianRational`], a complex number with rational
//! real and imaginary parts. `f32`/`f64` satisfy the same trait bounds for
//! callers that want an approximate instantiation of the generic kernel, but
//! none of the shipped pipelines use them.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Field operations required of matrix entries.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    /// Complex conjugate; identity for real scalar types.
    fn conj(&self) -> Self;

    /// Embedding of small integers, used for probe constants and tests.
    fn from_integer(n: i64) -> Self;

    // By-reference arithmetic used by the generic kernel; the defaults
    // clone, heavier scalars override them.
    fn add_ref(&self, rhs: &Self) -> Self {
        self.clone() + rhs.clone()
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        self.clone() - rhs.clone()
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self.clone() * rhs.clone()
    }
    fn div_ref(&self, rhs: &Self) -> Self {
        self.clone() / rhs.clone()
    }
}

impl Scalar for f64 {
    fn conj(&self) -> Self {
        *self
    }
    fn from_integer(n: i64) -> Self {
        n as f64
    }
}

impl Scalar for f32 {
    fn conj(&self) -> Self {
        *self
    }
    fn from_integer(n: i64) -> Self {
        n as f32
    }
}

/// An exact complex scalar `re + im·i` with arbitrary-precision rational
/// parts.
///
/// Both components are kept in lowest terms with positive denominators after
/// every operation (guaranteed by the underlying rational type), so equality
/// is plain structural equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    re: BigRational,
    im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_rational(re: BigRational) -> Self {
        Self {
            re,
            im: BigRational::zero(),
        }
    }

    /// Builds `re + im·i` from plain integers.
    pub fn from_integers(re: i64, im: i64) -> Self {
        Self {
            re: BigRational::from_integer(BigInt::from(re)),
            im: BigRational::from_integer(BigInt::from(im)),
        }
    }

    /// Builds the rational `num/den` as a real scalar. `den` must be nonzero.
    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// True when the value is real and strictly positive.
    pub fn is_real_positive(&self) -> bool {
        self.is_real() && self.re.is_positive()
    }

    /// True when the value is real and `>= 0`.
    pub fn is_real_nonnegative(&self) -> bool {
        self.is_real() && !self.re.is_negative()
    }

    /// `re² + im²`, the squared modulus, as an exact rational.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Canonical rendering, shared with the on-disk matrix format:
/// `0`, `-1/2`, `3i`, `2+1/3i`, `0-1i`.
impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", self.re);
        }
        if self.re.is_zero() {
            if self.im.is_negative() {
                return write!(f, "0-{}i", -&self.im);
            }
            return write!(f, "{}i", self.im);
        }
        if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, -&self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl Add for GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: Self) -> Self {
        Self {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl<'a> Add<&'a GaussianRational> for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &'a GaussianRational) -> GaussianRational {
        GaussianRational {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub for GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: Self) -> Self {
        Self {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl<'a> Sub<&'a GaussianRational> for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &'a GaussianRational) -> GaussianRational {
        GaussianRational {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul for GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: Self) -> Self {
        (&self).mul(&rhs)
    }
}

impl<'a> Mul<&'a GaussianRational> for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &'a GaussianRational) -> GaussianRational {
        // real factors dominate in practice; skip the cross terms for them
        if self.im.is_zero() {
            return GaussianRational {
                re: &self.re * &rhs.re,
                im: &self.re * &rhs.im,
            };
        }
        if rhs.im.is_zero() {
            return GaussianRational {
                re: &self.re * &rhs.re,
                im: &self.im * &rhs.re,
            };
        }
        GaussianRational {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Div for GaussianRational {
    type Output = GaussianRational;
    /// Exact complex division. Panics on a zero divisor, like integer
    /// division; callers divide only by known-nonzero pivots.
    fn div(self, rhs: Self) -> Self {
        (&self).div(&rhs)
    }
}

impl<'a> Div<&'a GaussianRational> for &GaussianRational {
    type Output = GaussianRational;
    fn div(self, rhs: &'a GaussianRational) -> GaussianRational {
        if rhs.im.is_zero() {
            assert!(!rhs.re.is_zero(), "division by zero Gaussian rational");
            return GaussianRational {
                re: &self.re / &rhs.re,
                im: &self.im / &rhs.re,
            };
        }
        let denom = rhs.norm_sqr();
        GaussianRational {
            re: (&self.re * &rhs.re + &self.im * &rhs.im) / &denom,
            im: (&self.im * &rhs.re - &self.re * &rhs.im) / &denom,
        }
    }
}

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> Self {
        Self {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational {
            re: -&self.re,
            im: -&self.im,
        }
    }
}

impl Zero for GaussianRational {
    fn zero() -> Self {
        Self {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussianRational {
    fn one() -> Self {
        Self {
            re: BigRational::one(),
            im: BigRational::zero(),
        }
    }
}

impl Scalar for GaussianRational {
    fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: -&self.im,
        }
    }
    fn from_integer(n: i64) -> Self {
        Self::from_integers(n, 0)
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div_ref(&self, rhs: &Self) -> Self {
        self / rhs
    }
}

impl From<i64> for GaussianRational {
    fn from(n: i64) -> Self {
        Self::from_integers(n, 0)
    }
}
