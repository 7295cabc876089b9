use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::NumericError;
use crate::expr::{Env, Expr, OpLeaf};
use crate::weyl::OperatorPoly;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepKind {
    /// Two-level system with `S_k = (hbar/2) sigma_k`.
    SpinHalf,
    /// Lowest `dimension` oscillator levels, length scale 1.
    Oscillator { dimension: usize, trusted: usize },
}

impl RepKind {
    pub fn name(&self) -> &'static str {
        match self {
            RepKind::SpinHalf => "spin-half",
            RepKind::Oscillator { .. } => "oscillator-truncation",
        }
    }
}

/// Concrete matrices for the operator leaves plus numeric values for every
/// scalar symbol.
#[derive(Clone, Debug)]
pub struct Representation {
    kind: RepKind,
    env: Env,
    leaves: Vec<(OpLeaf, CMatrix)>,
}

impl Representation {
    pub fn spin_half(env: Env) -> Self {
        let h = env.hbar / 2.0;
        let z = c(0.0, 0.0);
        let sx = CMatrix::from_row_slice(2, 2, &[z, c(h, 0.0), c(h, 0.0), z]);
        let sy = CMatrix::from_row_slice(2, 2, &[z, c(0.0, -h), c(0.0, h), z]);
        let sz = CMatrix::from_row_slice(2, 2, &[c(h, 0.0), z, z, c(-h, 0.0)]);
        Self { kind: RepKind::SpinHalf, env, leaves: vec![(OpLeaf::Sx, sx), (OpLeaf::Sy, sy), (OpLeaf::Sz, sz)] }
    }

    /// `x = (a + a†)/√2`, `p = i hbar (a† - a)/√2` on levels `0..dimension`.
    pub fn oscillator(dimension: usize, trusted: usize, env: Env) -> Result<Self, NumericError> {
        if dimension < 2 {
            return Err(NumericError::InvalidRepresentation(format!("dimension {dimension} < 2")));
        }
        if trusted == 0 || trusted > dimension {
            return Err(NumericError::InvalidRepresentation(format!(
                "trusted dimension {trusted} must lie in 1..={dimension}"
            )));
        }
        let mut x = CMatrix::zeros(dimension, dimension);
        let mut p = CMatrix::zeros(dimension, dimension);
        for n in 0..dimension - 1 {
            let amp = ((n + 1) as f64 / 2.0).sqrt();
            x[(n, n + 1)] = c(amp, 0.0);
            x[(n + 1, n)] = c(amp, 0.0);
            p[(n, n + 1)] = c(0.0, -env.hbar * amp);
            p[(n + 1, n)] = c(0.0, env.hbar * amp);
        }
        Ok(Self { kind: RepKind::Oscillator { dimension, trusted }, env, leaves: vec![(OpLeaf::X, x), (OpLeaf::P, p)] })
    }

    pub fn kind(&self) -> RepKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        match self.kind {
            RepKind::SpinHalf => 2,
            RepKind::Oscillator { dimension, .. } => dimension,
        }
    }

    /// Size of the block on which truncation defects are controlled.
    pub fn trusted(&self) -> usize {
        match self.kind {
            RepKind::SpinHalf => 2,
            RepKind::Oscillator { trusted, .. } => trusted,
        }
    }

    pub fn hbar(&self) -> f64 {
        self.env.hbar
    }

    pub fn env(&self) -> &Env {
        &self.env
    }

    pub fn env_at(&self, t: f64) -> Env {
        self.env.at_time(t)
    }

    pub fn leaf(&self, leaf: OpLeaf) -> Result<&CMatrix, NumericError> {
        self.leaves
            .iter()
            .find(|(l, _)| *l == leaf)
            .map(|(_, m)| m)
            .ok_or(NumericError::LeafNotInRepresentation { leaf: leaf.name(), kind: self.kind.name() })
    }

    pub fn identity(&self) -> CMatrix {
        CMatrix::identity(self.dimension(), self.dimension())
    }

    /// Upper-left `trusted × trusted` block.
    pub fn project(&self, m: &CMatrix) -> CMatrix {
        let k = self.trusted();
        m.view((0, 0), (k, k)).into_owned()
    }

    pub fn materialize(&self, e: &Expr, t: f64) -> Result<CMatrix, NumericError> {
        let env = self.env_at(t);
        self.materialize_in(e, &env)
    }

    /// Like [`materialize`](Self::materialize) with every scalar symbol taken from `env`.
    pub fn materialize_in(&self, e: &Expr, env: &Env) -> Result<CMatrix, NumericError> {
        Ok(match self.value(e, env)? {
            Value::Scalar(z) => self.identity() * z,
            Value::Matrix(m) => m,
        })
    }

    fn value(&self, e: &Expr, env: &Env) -> Result<Value, NumericError> {
        if e.is_scalar() {
            return Ok(Value::Scalar(e.eval(env)?));
        }
        Ok(match e {
            Expr::Op(leaf) => Value::Matrix(self.leaf(*leaf)?.clone()),
            Expr::Sum(ts) => {
                let mut acc = Value::Scalar(c(0.0, 0.0));
                for t in ts {
                    acc = acc.add(self.value(t, env)?, self.dimension());
                }
                acc
            }
            Expr::Product(fs) => {
                let mut acc = Value::Scalar(c(1.0, 0.0));
                for f in fs {
                    acc = acc.mul(self.value(f, env)?);
                }
                acc
            }
            Expr::Pow(b, n) => {
                let base = self.value(b, env)?;
                let mut acc = Value::Scalar(c(1.0, 0.0));
                for _ in 0..*n {
                    acc = acc.mul(base.clone());
                }
                acc
            }
            Expr::Div(a, b) => {
                let d = b.eval(env)?;
                if d == c(0.0, 0.0) {
                    return Err(crate::expr::EvalError::DivisionByZero.into());
                }
                self.value(a, env)?.mul(Value::Scalar(d.inv()))
            }
            // scalar-only nodes were handled above
            Expr::Const(_) | Expr::Param(_) | Expr::Time | Expr::Hbar | Expr::Func(..) => {
                Value::Scalar(e.eval(env)?)
            }
        })
    }

    /// Materialize a normal-ordered polynomial word by word.
    pub fn materialize_poly(&self, a: &OperatorPoly, t: f64) -> Result<CMatrix, NumericError> {
        let env = self.env_at(t);
        let x = self.leaf(OpLeaf::X)?;
        let p = self.leaf(OpLeaf::P)?;
        let mut acc = CMatrix::zeros(self.dimension(), self.dimension());
        for ((i, j), coeff) in a.terms() {
            let z = coeff.eval(&env)?;
            acc += matrix_power(x, i) * matrix_power(p, j) * z;
        }
        Ok(acc)
    }
}

pub(crate) fn matrix_power(m: &CMatrix, n: u32) -> CMatrix {
    let mut acc = CMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..n {
        acc = &acc * m;
    }
    acc
}

#[derive(Clone)]
enum Value {
    Scalar(Complex64),
    Matrix(CMatrix),
}

impl Value {
    fn add(self, rhs: Value, n: usize) -> Value {
        match (self, rhs) {
            (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(a + b),
            (Value::Matrix(m), Value::Scalar(z)) | (Value::Scalar(z), Value::Matrix(m)) => {
                Value::Matrix(m + CMatrix::identity(n, n) * z)
            }
            (Value::Matrix(a), Value::Matrix(b)) => Value::Matrix(a + b),
        }
    }

    fn mul(self, rhs: Value) -> Value {
        match (self, rhs) {
            (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(a * b),
            (Value::Matrix(m), Value::Scalar(z)) | (Value::Scalar(z), Value::Matrix(m)) => Value::Matrix(m * z),
            (Value::Matrix(a), Value::Matrix(b)) => Value::Matrix(a * b),
        }
    }
}
