use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;

use super::scalar::ScalarPoly;
use crate::gauss::GaussRat;

/// Normal-ordered element of the Weyl algebra: `Σ c_ab x^a p^b` with every `x`
/// to the left of every `p`. Zero coefficients are never stored, so equality
/// is exact equality of the algebra elements.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct OperatorPoly {
    terms: BTreeMap<(u32, u32), ScalarPoly>,
}

fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::from(1), |acc, j| acc * BigInt::from(j))
}

/// `(-i hbar)^k k! C(b,k) C(c,k)`: coefficient of `x^(c-k) p^(b-k)` in `p^b x^c`.
pub fn reorder_coefficient(b: u32, c: u32, k: u32) -> ScalarPoly {
    let count = factorial(k) * binomial(BigInt::from(b), BigInt::from(k)) * binomial(BigInt::from(c), BigInt::from(k));
    let minus_i_hbar = ScalarPoly::i_hbar().scale(&GaussRat::from_int(-1));
    minus_i_hbar.pow(k).scale(&GaussRat::real(BigRational::from_integer(count)))
}

impl OperatorPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::scalar(ScalarPoly::one())
    }

    pub fn scalar(c: ScalarPoly) -> Self {
        Self::monomial(c, 0, 0)
    }

    /// `c * x^a p^b`
    pub fn monomial(c: ScalarPoly, a: u32, b: u32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((a, b), c);
        }
        Self { terms }
    }

    pub fn x() -> Self {
        Self::monomial(ScalarPoly::one(), 1, 0)
    }

    pub fn p() -> Self {
        Self::monomial(ScalarPoly::one(), 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `x^a p^b`.
    pub fn coeff(&self, a: u32, b: u32) -> ScalarPoly {
        self.terms.get(&(a, b)).cloned().unwrap_or_default()
    }

    /// Terms in `(a, b)` lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), &ScalarPoly)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn keys(&self) -> Vec<(u32, u32)> {
        self.terms.keys().copied().collect()
    }

    /// Largest `a + b` over the stored words.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(a, b)| a + b).max().unwrap_or(0)
    }

    fn add_term(&mut self, key: (u32, u32), c: ScalarPoly) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(existing) => {
                *existing = &*existing + &c;
                if existing.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    pub fn scale(&self, c: &ScalarPoly) -> Self {
        let mut out = Self::zero();
        for (k, v) in &self.terms {
            out.add_term(*k, v * c);
        }
        out
    }

    pub fn scale_rat(&self, c: &GaussRat) -> Self {
        self.scale(&ScalarPoly::constant(c.clone()))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// `[self, rhs] = self*rhs - rhs*self`.
    pub fn commutator(&self, rhs: &OperatorPoly) -> Self {
        &(self * rhs) - &(rhs * self)
    }

    /// Hermitian adjoint: `(c x^a p^b)† = conj(c) p^b x^a`, re-normal-ordered.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for ((a, b), c) in &self.terms {
            let word = &Self::monomial(ScalarPoly::one(), 0, *b) * &Self::monomial(ScalarPoly::one(), *a, 0);
            out = &out + &word.scale(&c.conj());
        }
        out
    }

    pub fn is_hermitian(&self) -> bool {
        self.adjoint() == *self
    }

    /// Exact time derivative of the coefficients.
    pub fn d_dt(&self) -> Self {
        let mut out = Self::zero();
        for (k, v) in &self.terms {
            out.add_term(*k, v.d_dt());
        }
        out
    }

    /// Exact division by `hbar`; `None` if some coefficient lacks the factor.
    pub fn div_hbar(&self) -> Option<Self> {
        let mut out = Self::zero();
        for (k, v) in &self.terms {
            out.add_term(*k, v.div_hbar()?);
        }
        Some(out)
    }
}

impl Add for &OperatorPoly {
    type Output = OperatorPoly;
    fn add(self, rhs: &OperatorPoly) -> OperatorPoly {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.add_term(*k, v.clone());
        }
        out
    }
}

impl Sub for &OperatorPoly {
    type Output = OperatorPoly;
    fn sub(self, rhs: &OperatorPoly) -> OperatorPoly {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.add_term(*k, -v);
        }
        out
    }
}

impl Neg for &OperatorPoly {
    type Output = OperatorPoly;
    fn neg(self) -> OperatorPoly {
        self.scale_rat(&GaussRat::from_int(-1))
    }
}

/// Normal-ordered product via
/// `p^b x^c = Σ_k (-i hbar)^k k! C(b,k) C(c,k) x^(c-k) p^(b-k)`.
impl Mul for &OperatorPoly {
    type Output = OperatorPoly;
    fn mul(self, rhs: &OperatorPoly) -> OperatorPoly {
        let mut out = OperatorPoly::zero();
        for ((a, b), c1) in &self.terms {
            for ((c, d), c2) in &rhs.terms {
                let c12 = c1 * c2;
                for k in 0..=(*b).min(*c) {
                    out.add_term((a + c - k, b + d - k), &c12 * &reorder_coefficient(*b, *c, k));
                }
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for OperatorPoly {
            type Output = OperatorPoly;
            fn $m(self, rhs: OperatorPoly) -> OperatorPoly {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl From<ScalarPoly> for OperatorPoly {
    fn from(c: ScalarPoly) -> Self {
        Self::scalar(c)
    }
}

fn word(a: u32, b: u32) -> String {
    let sym = |name: &str, e: u32| if e == 1 { name.to_string() } else { format!("{name}^{e}") };
    match (a, b) {
        (0, 0) => String::new(),
        (a, 0) => sym("x", a),
        (0, b) => sym("p", b),
        (a, b) => format!("{}*{}", sym("x", a), sym("p", b)),
    }
}

/// Canonical text in the expression grammar, words in `(a, b)` order: the
/// output re-parses and lowers back to the same polynomial.
impl fmt::Display for OperatorPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, ((a, b), c)) in self.terms.iter().enumerate() {
            let w = word(*a, *b);
            if w.is_empty() {
                if c.len() == 1 {
                    super::scalar::fmt_signed_terms(c, f, i == 0)?;
                } else {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "({c})")?;
                }
                continue;
            }
            let (neg, mag) = c.as_coefficient();
            match (i == 0, neg) {
                (true, true) => write!(f, "-")?,
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
                (true, false) => {}
            }
            match mag {
                Some(m) => write!(f, "{m} * {w}")?,
                None => write!(f, "{w}")?,
            }
        }
        Ok(())
    }
}
