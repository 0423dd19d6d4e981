//! Coefficient fields for jets: double-precision complex numbers and exact
//! rational complex numbers.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// Moduli below this are treated as zero by the floating-point field.
pub const PRUNE_EPS: f64 = 1e-14;

/// Exact complex number with arbitrary-precision rational parts.
pub type ExactComplex = Complex<BigRational>;

/// A complex field usable as jet coefficients.
pub trait Coeff:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    fn zero() -> Self;
    fn one() -> Self;
    /// The imaginary unit.
    fn i() -> Self;
    fn from_i64(k: i64) -> Self;
    /// `num/den` as a real number.
    fn from_ratio(num: i64, den: i64) -> Self;
    fn conj(&self) -> Self;
    /// Whether the value should be dropped from a sparse jet.
    fn is_negligible(&self) -> bool;
    fn modulus(&self) -> f64;
    fn to_c64(&self) -> Complex64;
}

impl Coeff for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn i() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn from_i64(k: i64) -> Self {
        Complex64::new(k as f64, 0.0)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn is_negligible(&self) -> bool {
        self.norm() < PRUNE_EPS
    }
    fn modulus(&self) -> f64 {
        self.norm()
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
}

impl Coeff for ExactComplex {
    fn zero() -> Self {
        Complex::new(BigRational::zero(), BigRational::zero())
    }
    fn one() -> Self {
        Complex::new(BigRational::one(), BigRational::zero())
    }
    fn i() -> Self {
        Complex::new(BigRational::zero(), BigRational::one())
    }
    fn from_i64(k: i64) -> Self {
        Complex::new(BigRational::from_integer(BigInt::from(k)), BigRational::zero())
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(BigRational::new(BigInt::from(num), BigInt::from(den)), BigRational::zero())
    }
    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
    fn is_negligible(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn modulus(&self) -> f64 {
        let re = self.re.to_f64().unwrap_or(f64::NAN);
        let im = self.im.to_f64().unwrap_or(f64::NAN);
        re.hypot(im)
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
}

/// Exact complex number `(re_num/re_den) + i (im_num/im_den)`.
pub fn exact(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> ExactComplex {
    Complex::new(
        BigRational::new(BigInt::from(re_num), BigInt::from(re_den)),
        BigRational::new(BigInt::from(im_num), BigInt::from(im_den)),
    )
}

/// Whether an exact value is exactly zero (no tolerance).
pub fn exact_is_zero(c: &ExactComplex) -> bool {
    c.re.is_zero() && c.im.is_zero()
}

/// Largest absolute value of the real and imaginary parts, as a rational.
pub fn exact_abs_max(c: &ExactComplex) -> BigRational {
    let a = c.re.abs();
    let b = c.im.abs();
    if a > b {
        a
    } else {
        b
    }
}
