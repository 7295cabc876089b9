//! Exact arithmetic in the one-dimensional Weyl algebra generated by `x`, `p`
//! with `[x, p] = i hbar`.
//!
//! Coefficients are Laurent polynomials in the model parameters (ordinary
//! polynomials in `t` and `hbar`) over the Gaussian rationals, so every
//! identity checked here is decided exactly.

mod poly;
mod scalar;

pub use poly::{reorder_coefficient, OperatorPoly};
pub use scalar::{Monomial, ScalarPoly};

use crate::expr::{Expr, OpLeaf};
use crate::gauss::GaussRat;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WeylError {
    #[error("not Weyl-lowerable: {0}")]
    NotWeylLowerable(String),
    #[error("ansatz rates must be pairwise distinct (rate {0} repeated)")]
    DuplicateRate(Box<GaussRat>),
    #[error("ansatz rates must be nonzero")]
    ZeroRate,
    #[error("coefficient is not divisible by hbar")]
    HbarDivision,
}

/// Lower an expression into normal-ordered form, applying `p x -> x p - i hbar`.
pub fn lower(e: &Expr) -> Result<OperatorPoly, WeylError> {
    Ok(match e {
        Expr::Const(c) => OperatorPoly::scalar(ScalarPoly::constant(c.clone())),
        Expr::Param(name) => OperatorPoly::scalar(ScalarPoly::param(name)),
        Expr::Time => OperatorPoly::scalar(ScalarPoly::t()),
        Expr::Hbar => OperatorPoly::scalar(ScalarPoly::hbar()),
        Expr::Op(OpLeaf::X) => OperatorPoly::x(),
        Expr::Op(OpLeaf::P) => OperatorPoly::p(),
        Expr::Op(leaf) => {
            return Err(WeylError::NotWeylLowerable(format!("spin operator {}", leaf.name())));
        }
        Expr::Sum(ts) => {
            let mut acc = OperatorPoly::zero();
            for t in ts {
                acc = &acc + &lower(t)?;
            }
            acc
        }
        Expr::Product(fs) => {
            let mut acc = OperatorPoly::one();
            for f in fs {
                acc = &acc * &lower(f)?;
            }
            acc
        }
        Expr::Pow(b, n) if *n >= 0 => lower(b)?.pow(*n as u32),
        Expr::Pow(b, n) => {
            let inv = invertible_scalar(b)?;
            OperatorPoly::scalar(inv.pow(n.unsigned_abs()))
        }
        Expr::Div(a, b) => lower(a)?.scale(&invertible_scalar(b)?),
        Expr::Func(f, _) => {
            return Err(WeylError::NotWeylLowerable(format!("transcendental function {}", f.name())));
        }
    })
}

/// Inverse of a denominator, which must be a parameter monomial.
fn invertible_scalar(e: &Expr) -> Result<ScalarPoly, WeylError> {
    let lowered = lower(e)?;
    let scalar = match lowered.keys().as_slice() {
        [] => ScalarPoly::zero(),
        [(0, 0)] => lowered.coeff(0, 0),
        _ => return Err(WeylError::NotWeylLowerable(format!("operator-valued denominator {e}"))),
    };
    scalar
        .inverse()
        .ok_or_else(|| WeylError::NotWeylLowerable(format!("denominator {e} is not a parameter monomial")))
}

/// `i hbar dA/dt + [A, H]`; zero exactly when `A` is conserved under `H`.
pub fn conservation_residual(a: &OperatorPoly, h: &OperatorPoly) -> OperatorPoly {
    &a.d_dt().scale(&ScalarPoly::i_hbar()) + &a.commutator(h)
}

/// `[y, [a,y], [a,[a,y]], ...]` with `n + 1` entries.
pub fn ad_tower(a: &OperatorPoly, y: &OperatorPoly, n: usize) -> Vec<OperatorPoly> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(y.clone());
    for k in 0..n {
        let next = a.commutator(&out[k]);
        out.push(next);
    }
    out
}

/// `(i/hbar) [a, y]`, exact.
pub fn generator_action(a: &OperatorPoly, y: &OperatorPoly) -> Result<OperatorPoly, WeylError> {
    let c = a.commutator(y).div_hbar().ok_or(WeylError::HbarDivision)?;
    Ok(c.scale_rat(&GaussRat::i()))
}

/// Coefficients `C_n` of `s^n` in `U_s⁻¹ y U_s` for `U_s = exp(-i s a / hbar)`:
/// `C_n = (i/hbar)^n ad_a^n(y) / n!`, for `n = 0..=order`.
pub fn conjugate_truncated(a: &OperatorPoly, y: &OperatorPoly, order: usize) -> Result<Vec<OperatorPoly>, WeylError> {
    let mut out = Vec::with_capacity(order + 1);
    out.push(y.clone());
    for n in 1..=order {
        let next = generator_action(a, &out[n - 1])?.scale_rat(&GaussRat::ratio(1, n as i64));
        out.push(next);
    }
    Ok(out)
}

/// One exponential mode `(e^{rate s} - 1) * term` of a closed-form conjugation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnsatzTerm {
    pub rate: GaussRat,
    pub term: OperatorPoly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnsatzVerdict {
    pub pass: bool,
    /// `(i/hbar)[a, b_k] - r_k b_k` for every mode.
    pub eigen_residuals: Vec<OperatorPoly>,
    /// `(i/hbar)[a, y] - Σ r_k b_k`.
    pub initial_residual: OperatorPoly,
}

impl AnsatzVerdict {
    /// First nonzero residual, if any.
    pub fn witness(&self) -> Option<&OperatorPoly> {
        self.eigen_residuals.iter().chain(std::iter::once(&self.initial_residual)).find(|r| !r.is_zero())
    }
}

fn check_rates(ansatz: &[AnsatzTerm]) -> Result<(), WeylError> {
    for (i, t) in ansatz.iter().enumerate() {
        if t.rate.is_zero() {
            return Err(WeylError::ZeroRate);
        }
        if ansatz[..i].iter().any(|u| u.rate == t.rate) {
            return Err(WeylError::DuplicateRate(Box::new(t.rate.clone())));
        }
    }
    Ok(())
}

/// Certifies `U_s⁻¹ y U_s = y + Σ_k (e^{r_k s} - 1) b_k` exactly.
///
/// The closed form solves `dF/ds = (i/hbar)[a, F]`, `F(0) = y` iff every `b_k`
/// is an eigenoperator of `(i/hbar) ad_a` with eigenvalue `r_k` and the
/// initial slope `(i/hbar)[a, y]` equals `Σ r_k b_k`.
pub fn verify_exponential_ansatz(
    a: &OperatorPoly,
    y: &OperatorPoly,
    ansatz: &[AnsatzTerm],
) -> Result<AnsatzVerdict, WeylError> {
    check_rates(ansatz)?;
    let mut eigen_residuals = Vec::with_capacity(ansatz.len());
    let mut slope = OperatorPoly::zero();
    for t in ansatz {
        let rb = t.term.scale_rat(&t.rate);
        eigen_residuals.push(&generator_action(a, &t.term)? - &rb);
        slope = &slope + &rb;
    }
    let initial_residual = &generator_action(a, y)? - &slope;
    let pass = initial_residual.is_zero() && eigen_residuals.iter().all(OperatorPoly::is_zero);
    Ok(AnsatzVerdict { pass, eigen_residuals, initial_residual })
}

/// Taylor coefficients of `y + Σ_k (e^{r_k s} - 1) b_k` up to `s^order`.
pub fn exponential_series(y: &OperatorPoly, ansatz: &[AnsatzTerm], order: usize) -> Vec<OperatorPoly> {
    let mut out = vec![y.clone()];
    let mut fact = GaussRat::one();
    for n in 1..=order {
        fact = &fact * &GaussRat::from_int(n as i64);
        let inv_fact = fact.inv().unwrap();
        let mut c = OperatorPoly::zero();
        for t in ansatz {
            c = &c + &t.term.scale_rat(&(&t.rate.pow(n as u32) * &inv_fact));
        }
        out.push(c);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GalileanVerdict {
    pub pass: bool,
    /// `(i/hbar)[a, x] + t`
    pub x_residual: OperatorPoly,
    /// `(i/hbar)[a, p] + m`
    pub p_residual: OperatorPoly,
}

/// Checks the infinitesimal boost `U_v⁻¹ x U_v = x - v t`, `U_v⁻¹ p U_v = p - m v`
/// for `U_v = exp(-i v a / hbar)`, i.e. `(i/hbar)[a, x] = -t` and
/// `(i/hbar)[a, p] = -m`. Equivalently `[a, x] = i hbar t`, `[a, p] = i hbar m`.
pub fn galilean_generator_constraints(a: &OperatorPoly) -> GalileanVerdict {
    let action = |y: &OperatorPoly| generator_action(a, y).expect("commutators are divisible by hbar");
    let x_residual = &action(&OperatorPoly::x()) + &OperatorPoly::scalar(ScalarPoly::t());
    let p_residual = &action(&OperatorPoly::p()) + &OperatorPoly::scalar(ScalarPoly::param("m"));
    GalileanVerdict { pass: x_residual.is_zero() && p_residual.is_zero(), x_residual, p_residual }
}
