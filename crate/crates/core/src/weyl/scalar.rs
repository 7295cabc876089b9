use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::expr::{Env, EvalError};
use crate::gauss::GaussRat;

/// Monomial `t^t * hbar^hbar * Π param^k`; parameter exponents may be negative.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub t: u32,
    pub hbar: u32,
    pub params: BTreeMap<String, i32>,
}

impl Monomial {
    pub fn is_one(&self) -> bool {
        self.t == 0 && self.hbar == 0 && self.params.is_empty()
    }

    fn mul(&self, rhs: &Monomial) -> Monomial {
        let mut params = self.params.clone();
        for (k, v) in &rhs.params {
            let e = params.entry(k.clone()).or_insert(0);
            *e += v;
            if *e == 0 {
                params.remove(k);
            }
        }
        Monomial { t: self.t + rhs.t, hbar: self.hbar + rhs.hbar, params }
    }

    fn eval(&self, env: &Env) -> Result<f64, EvalError> {
        let mut v = env.t.powi(self.t as i32) * env.hbar.powi(self.hbar as i32);
        for (k, e) in &self.params {
            let p = env.params.get(k).ok_or_else(|| EvalError::Unbound(k.clone()))?;
            if *e < 0 && *p == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            v *= p.powi(*e);
        }
        Ok(v)
    }
}

/// Laurent polynomial in the parameters (polynomial in `t` and `hbar`) with
/// Gaussian-rational coefficients. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScalarPoly {
    terms: BTreeMap<Monomial, GaussRat>,
}

impl ScalarPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: GaussRat) -> Self {
        Self::term(c, Monomial::default())
    }

    pub fn one() -> Self {
        Self::constant(GaussRat::one())
    }

    pub fn term(c: GaussRat, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Self { terms }
    }

    pub fn t() -> Self {
        Self::term(GaussRat::one(), Monomial { t: 1, ..Default::default() })
    }

    pub fn hbar() -> Self {
        Self::term(GaussRat::one(), Monomial { hbar: 1, ..Default::default() })
    }

    pub fn param(name: &str) -> Self {
        Self::param_pow(name, 1)
    }

    pub fn param_pow(name: &str, k: i32) -> Self {
        let mut m = Monomial::default();
        if k != 0 {
            m.params.insert(name.to_string(), k);
        }
        Self::term(GaussRat::one(), m)
    }

    /// `i * hbar`, the value of `[x, p]`.
    pub fn i_hbar() -> Self {
        Self::term(GaussRat::i(), Monomial { hbar: 1, ..Default::default() })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussRat)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, m: Monomial, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing = &*existing + &c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn scale(&self, c: &GaussRat) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    pub fn conj(&self) -> Self {
        Self { terms: self.terms.iter().map(|(m, v)| (m.clone(), v.conj())).collect() }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn d_dt(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if m.t > 0 {
                let mut dm = m.clone();
                dm.t -= 1;
                out.add_term(dm, c * &GaussRat::from_int(m.t as i64));
            }
        }
        out
    }

    /// Exact division by `hbar`; `None` if some term has no `hbar` factor.
    pub fn div_hbar(&self) -> Option<Self> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            if m.hbar == 0 {
                return None;
            }
            let mut dm = m.clone();
            dm.hbar -= 1;
            terms.insert(dm, c.clone());
        }
        Some(Self { terms })
    }

    /// Inverse of a single-term polynomial free of `t` and `hbar`.
    pub fn inverse(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next().unwrap();
        if m.t != 0 || m.hbar != 0 {
            return None;
        }
        let params = m.params.iter().map(|(k, v)| (k.clone(), -v)).collect();
        Some(Self::term(c.inv()?, Monomial { t: 0, hbar: 0, params }))
    }

    pub fn eval(&self, env: &Env) -> Result<Complex64, EvalError> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            acc += c.to_complex() * m.eval(env)?;
        }
        Ok(acc)
    }

    /// Single-term polynomial with a negative leading sign.
    fn is_negative_single(&self) -> bool {
        self.terms.len() == 1 && self.terms.values().next().unwrap().is_negative_leading()
    }
}

impl Add for &ScalarPoly {
    type Output = ScalarPoly;
    fn add(self, rhs: &ScalarPoly) -> ScalarPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &ScalarPoly {
    type Output = ScalarPoly;
    fn sub(self, rhs: &ScalarPoly) -> ScalarPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &ScalarPoly {
    type Output = ScalarPoly;
    fn mul(self, rhs: &ScalarPoly) -> ScalarPoly {
        let mut out = ScalarPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &ScalarPoly {
    type Output = ScalarPoly;
    fn neg(self) -> ScalarPoly {
        self.scale(&GaussRat::from_int(-1))
    }
}

impl From<GaussRat> for ScalarPoly {
    fn from(c: GaussRat) -> Self {
        Self::constant(c)
    }
}

/// Unsigned text of `c * m` for a `c` that is not negative-leading; `None`
/// when the term is exactly `1`.
fn term_magnitude(c: &GaussRat, m: &Monomial) -> Option<String> {
    let mut num = Vec::new();
    let mut den = Vec::new();
    let sym = |name: &str, e: u32| if e == 1 { name.to_string() } else { format!("{name}^{e}") };
    if m.t > 0 {
        num.push(sym("t", m.t));
    }
    if m.hbar > 0 {
        num.push(sym("hbar", m.hbar));
    }
    for (k, e) in &m.params {
        match e.signum() {
            1 => num.push(sym(k, *e as u32)),
            -1 => den.push(sym(k, e.unsigned_abs())),
            _ => {}
        }
    }
    let mut out = String::new();
    if !c.is_one() || num.is_empty() {
        if c.is_one() && !den.is_empty() {
            out.push('1');
        } else if !c.is_one() {
            out.push_str(&c.to_string());
        }
    }
    for s in num {
        if !out.is_empty() {
            out.push('*');
        }
        out.push_str(&s);
    }
    for s in den {
        out.push('/');
        out.push_str(&s);
    }
    if out.is_empty() {
        None
    } else {
        Some(out)
    }
}

pub(crate) fn fmt_signed_terms(
    p: &ScalarPoly,
    f: &mut fmt::Formatter<'_>,
    first: bool,
) -> fmt::Result {
    for (i, (m, c)) in p.terms.iter().enumerate() {
        let neg = c.is_negative_leading();
        let mag_c = if neg { -c } else { c.clone() };
        let mag = term_magnitude(&mag_c, m).unwrap_or_else(|| "1".to_string());
        match (i == 0 && first, neg) {
            (true, false) => write!(f, "{mag}")?,
            (true, true) => write!(f, "-{mag}")?,
            (false, false) => write!(f, " + {mag}")?,
            (false, true) => write!(f, " - {mag}")?,
        }
    }
    Ok(())
}

/// Prints in the expression grammar, monomials in their canonical order.
impl fmt::Display for ScalarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        fmt_signed_terms(self, f, true)
    }
}

impl ScalarPoly {
    /// `(sign is negative, unsigned text)` for a coefficient multiplying an
    /// operator word. Multi-term polynomials come back parenthesized.
    pub(crate) fn as_coefficient(&self) -> (bool, Option<String>) {
        if self.is_negative_single() {
            let (m, c) = self.terms.iter().next().unwrap();
            return (true, term_magnitude(&-c, m));
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            return (false, term_magnitude(c, m));
        }
        (false, Some(format!("({self})")))
    }
}
