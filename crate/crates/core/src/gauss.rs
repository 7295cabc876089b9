//! Exact Gaussian rationals `a + b·i` with arbitrary-precision rational parts.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        Self { re, im: BigRational::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Self::real(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::real(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Self { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let d = self.norm_sqr();
        Some(Self { re: &self.re / &d, im: -(&self.im / &d) })
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// True when the printed form should start with a minus sign: a negative
    /// real part, or a zero real part with a negative imaginary part.
    pub fn is_negative_leading(&self) -> bool {
        if self.re.is_zero() {
            self.im.is_negative()
        } else {
            self.re.is_negative() && self.im.is_zero()
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl From<i64> for GaussRat {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl From<BigRational> for GaussRat {
    fn from(r: BigRational) -> Self {
        Self::real(r)
    }
}

impl Add for &GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl Sub for &GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl Mul for &GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: &GaussRat) -> GaussRat {
        GaussRat {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat { re: -self.re.clone(), im: -self.im.clone() }
    }
}

impl Add for GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: GaussRat) -> GaussRat {
        &self + &rhs
    }
}

impl Sub for GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: GaussRat) -> GaussRat {
        &self - &rhs
    }
}

impl Mul for GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: GaussRat) -> GaussRat {
        &self * &rhs
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        -&self
    }
}

fn fmt_rat(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

/// Prints in the expression grammar: `3/2`, `-i`, `2*i`, `(1 + 2*i)`. A
/// standalone negative number prints with its leading `-`.
impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return fmt_rat(&self.re, f);
        }
        let write_imag = |f: &mut fmt::Formatter<'_>, b: &BigRational| -> fmt::Result {
            if b.is_one() {
                write!(f, "i")
            } else {
                fmt_rat(b, f)?;
                write!(f, "*i")
            }
        };
        if self.re.is_zero() {
            if self.im.is_negative() {
                write!(f, "-")?;
            }
            return write_imag(f, &self.im.abs());
        }
        write!(f, "(")?;
        fmt_rat(&self.re, f)?;
        if self.im.is_negative() {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        write_imag(f, &self.im.abs())?;
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_i_is_minus_i() {
        assert_eq!(GaussRat::i().inv().unwrap(), -GaussRat::i());
        assert!(GaussRat::zero().inv().is_none());
    }

    #[test]
    fn display_forms() {
        assert_eq!(GaussRat::ratio(3, 2).to_string(), "3/2");
        assert_eq!((-GaussRat::i()).to_string(), "-i");
        assert_eq!((&GaussRat::from_int(2) * &GaussRat::i()).to_string(), "2*i");
        let z = &GaussRat::one() + &(&GaussRat::ratio(-1, 2) * &GaussRat::i());
        assert_eq!(z.to_string(), "(1 - 1/2*i)");
    }

    #[test]
    fn i_squared() {
        assert_eq!(GaussRat::i().pow(2), GaussRat::from_int(-1));
    }
}
