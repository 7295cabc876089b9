use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_complex::Complex64;

use crate::gauss::GaussRat;

/// Operator symbols of the expression language.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpLeaf {
    X,
    P,
    Sx,
    Sy,
    Sz,
}

impl OpLeaf {
    pub fn name(self) -> &'static str {
        match self {
            OpLeaf::X => "x",
            OpLeaf::P => "p",
            OpLeaf::Sx => "Sx",
            OpLeaf::Sy => "Sy",
            OpLeaf::Sz => "Sz",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "x" => OpLeaf::X,
            "p" => OpLeaf::P,
            "Sx" => OpLeaf::Sx,
            "Sy" => OpLeaf::Sy,
            "Sz" => OpLeaf::Sz,
            _ => return None,
        })
    }

    pub fn is_spin(self) -> bool {
        matches!(self, OpLeaf::Sx | OpLeaf::Sy | OpLeaf::Sz)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            _ => return None,
        })
    }

    pub fn apply(self, z: Complex64) -> Complex64 {
        match self {
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
            Func::Exp => z.exp(),
        }
    }
}

/// Identifiers that can never be declared as parameters.
pub const RESERVED: &[&str] = &["x", "p", "Sx", "Sy", "Sz", "t", "hbar", "i", "sin", "cos", "exp"];

pub fn is_reserved(name: &str) -> bool {
    RESERVED.contains(&name)
}

/// Expression tree shared by scalar and operator expressions.
///
/// Products preserve factor order. Division is only by scalar expressions and
/// function arguments are scalar; the parser enforces both.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(GaussRat),
    Param(String),
    Time,
    Hbar,
    Op(OpLeaf),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Box<Expr>, i32),
    Div(Box<Expr>, Box<Expr>),
    Func(Func, Box<Expr>),
}

/// Operator-valued expression (the full language).
pub type OperatorExpr = Expr;

/// Numeric values for the scalar symbols of an expression.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Env {
    pub t: f64,
    pub hbar: f64,
    pub params: HashMap<String, f64>,
}

impl Env {
    pub fn new(hbar: f64) -> Self {
        Self { t: 0.0, hbar, params: HashMap::new() }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn at_time(&self, t: f64) -> Self {
        Self { t, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("operator leaf {0} in a scalar context")]
    OperatorInScalar(&'static str),
    #[error("no value for parameter {0}")]
    Unbound(String),
    #[error("division by zero")]
    DivisionByZero,
}

impl Expr {
    pub fn constant(c: impl Into<GaussRat>) -> Self {
        Expr::Const(c.into())
    }

    pub fn int(n: i64) -> Self {
        Expr::Const(GaussRat::from_int(n))
    }

    pub fn param(name: &str) -> Self {
        Expr::Param(name.to_string())
    }

    pub fn op(leaf: OpLeaf) -> Self {
        Expr::Op(leaf)
    }

    pub fn pow(self, n: i32) -> Self {
        Expr::Pow(Box::new(self), n)
    }

    pub fn div(self, rhs: Expr) -> Self {
        Expr::Div(Box::new(self), Box::new(rhs))
    }

    pub fn func(f: Func, arg: Expr) -> Self {
        Expr::Func(f, Box::new(arg))
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    /// Operator leaves appearing anywhere in the tree.
    pub fn operator_leaves(&self) -> BTreeSet<OpLeaf> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Op(l) = e {
                out.insert(*l);
            }
        });
        out
    }

    pub fn is_scalar(&self) -> bool {
        self.operator_leaves().is_empty()
    }

    /// Names of all parameters referenced.
    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Param(p) = e {
                out.insert(p.clone());
            }
        });
        out
    }

    pub fn contains_func(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= matches!(e, Expr::Func(..)));
        found
    }

    pub fn contains_time(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= matches!(e, Expr::Time));
        found
    }

    /// Whether the expression lowers into the Weyl algebra: only `x` and `p`
    /// leaves, no transcendental functions, and every division or negative
    /// power acts on a monomial in the parameters (never `t` or `hbar`).
    pub fn is_weyl_lowerable(&self) -> bool {
        fn scalar_monomial(e: &Expr) -> bool {
            match e {
                Expr::Const(c) => !c.is_zero(),
                Expr::Param(_) => true,
                Expr::Product(fs) => fs.iter().all(scalar_monomial),
                Expr::Pow(b, _) => scalar_monomial(b),
                Expr::Div(a, b) => scalar_monomial(a) && scalar_monomial(b),
                _ => false,
            }
        }
        fn walk(e: &Expr) -> bool {
            match e {
                Expr::Const(_) | Expr::Param(_) | Expr::Time | Expr::Hbar => true,
                Expr::Op(l) => !l.is_spin(),
                Expr::Sum(ts) | Expr::Product(ts) => ts.iter().all(walk),
                Expr::Pow(b, n) => {
                    if *n < 0 {
                        scalar_monomial(b)
                    } else {
                        walk(b)
                    }
                }
                Expr::Div(a, b) => walk(a) && scalar_monomial(b),
                Expr::Func(..) => false,
            }
        }
        walk(self)
    }

    pub fn visit<F: FnMut(&Expr)>(&self, f: &mut F) {
        f(self);
        match self {
            Expr::Sum(ts) | Expr::Product(ts) => ts.iter().for_each(|t| t.visit(f)),
            Expr::Pow(b, _) | Expr::Func(_, b) => b.visit(f),
            Expr::Div(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    /// Complex conjugation of a scalar expression: `i -> -i`, every symbol is
    /// real.
    pub fn conj(&self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(c.conj()),
            Expr::Sum(ts) => Expr::Sum(ts.iter().map(Expr::conj).collect()),
            Expr::Product(fs) => Expr::Product(fs.iter().map(Expr::conj).collect()),
            Expr::Pow(b, n) => b.conj().pow(*n),
            Expr::Div(a, b) => a.conj().div(b.conj()),
            Expr::Func(f, a) => Expr::func(*f, a.conj()),
            leaf => leaf.clone(),
        }
    }

    /// Evaluate a scalar expression.
    pub fn eval(&self, env: &Env) -> Result<Complex64, EvalError> {
        Ok(match self {
            Expr::Const(c) => c.to_complex(),
            Expr::Param(p) => {
                Complex64::new(*env.params.get(p).ok_or_else(|| EvalError::Unbound(p.clone()))?, 0.0)
            }
            Expr::Time => Complex64::new(env.t, 0.0),
            Expr::Hbar => Complex64::new(env.hbar, 0.0),
            Expr::Op(l) => return Err(EvalError::OperatorInScalar(l.name())),
            Expr::Sum(ts) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in ts {
                    acc += t.eval(env)?;
                }
                acc
            }
            Expr::Product(fs) => {
                let mut acc = Complex64::new(1.0, 0.0);
                for f in fs {
                    acc *= f.eval(env)?;
                }
                acc
            }
            Expr::Pow(b, n) => {
                let v = b.eval(env)?;
                if *n < 0 && v == Complex64::new(0.0, 0.0) {
                    return Err(EvalError::DivisionByZero);
                }
                v.powi(*n)
            }
            Expr::Div(a, b) => {
                let d = b.eval(env)?;
                if d == Complex64::new(0.0, 0.0) {
                    return Err(EvalError::DivisionByZero);
                }
                a.eval(env)? / d
            }
            Expr::Func(f, a) => f.apply(a.eval(env)?),
        })
    }

    /// Canonical form: nested sums and products flattened, numeric factors of a
    /// product merged into one leading constant, all-constant sums folded,
    /// single-element sums and products unwrapped.
    pub fn canonical(&self) -> Expr {
        match self {
            Expr::Sum(ts) => {
                let mut flat = Vec::with_capacity(ts.len());
                for t in ts {
                    match t.canonical() {
                        Expr::Sum(inner) => flat.extend(inner),
                        c => flat.push(c),
                    }
                }
                if flat.iter().all(|t| matches!(t, Expr::Const(_))) {
                    let sum = flat.iter().fold(GaussRat::zero(), |acc, t| match t {
                        Expr::Const(c) => &acc + c,
                        _ => unreachable!(),
                    });
                    return Expr::Const(sum);
                }
                if flat.len() == 1 {
                    flat.pop().unwrap()
                } else {
                    Expr::Sum(flat)
                }
            }
            Expr::Product(fs) => {
                let mut coeff = GaussRat::one();
                let mut rest = Vec::with_capacity(fs.len());
                let push = |e: Expr, coeff: &mut GaussRat, rest: &mut Vec<Expr>| match e {
                    Expr::Const(c) => *coeff = &*coeff * &c,
                    other => rest.push(other),
                };
                for f in fs {
                    match f.canonical() {
                        Expr::Product(inner) => {
                            for g in inner {
                                push(g, &mut coeff, &mut rest);
                            }
                        }
                        c => push(c, &mut coeff, &mut rest),
                    }
                }
                if rest.is_empty() {
                    return Expr::Const(coeff);
                }
                if coeff.is_one() {
                    if rest.len() == 1 {
                        return rest.pop().unwrap();
                    }
                    return Expr::Product(rest);
                }
                let mut out = Vec::with_capacity(rest.len() + 1);
                out.push(Expr::Const(coeff));
                out.extend(rest);
                Expr::Product(out)
            }
            Expr::Pow(b, n) => b.canonical().pow(*n),
            Expr::Div(a, b) => a.canonical().div(b.canonical()),
            Expr::Func(f, a) => Expr::func(*f, a.canonical()),
            leaf => leaf.clone(),
        }
    }

    /// `-self` in canonical form.
    pub fn neg(&self) -> Expr {
        Expr::Product(vec![Expr::int(-1), self.clone()]).canonical()
    }

    /// Removes additive zeros and multiplicative ones left behind by
    /// differentiation; returns a canonical expression.
    pub fn prune(&self) -> Expr {
        fn go(e: &Expr) -> Expr {
            match e {
                Expr::Sum(ts) => {
                    let kept: Vec<Expr> = ts.iter().map(go).filter(|t| !t.is_zero_const()).collect();
                    if kept.is_empty() {
                        Expr::int(0)
                    } else {
                        Expr::Sum(kept)
                    }
                }
                Expr::Product(fs) => {
                    let fs: Vec<Expr> = fs.iter().map(go).collect();
                    if fs.iter().any(Expr::is_zero_const) {
                        Expr::int(0)
                    } else {
                        Expr::Product(fs)
                    }
                }
                Expr::Pow(b, n) => match (go(b), *n) {
                    (_, 0) => Expr::int(1),
                    (b, 1) => b,
                    (b, n) if b.is_zero_const() && n > 0 => Expr::int(0),
                    (b, n) => b.pow(n),
                },
                Expr::Div(a, b) => {
                    let a = go(a);
                    let b = go(b);
                    if a.is_zero_const() {
                        Expr::int(0)
                    } else if matches!(&b, Expr::Const(c) if c.is_one()) {
                        a
                    } else {
                        a.div(b)
                    }
                }
                Expr::Func(f, a) => Expr::func(*f, go(a)),
                leaf => leaf.clone(),
            }
        }
        go(&self.canonical()).canonical()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::print::print(self))
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Sum(vec![self, rhs]).canonical()
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sum(vec![self, rhs.neg()]).canonical()
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Product(vec![self, rhs]).canonical()
    }
}

/// An expression guaranteed to contain no operator leaves.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScalarExpr(Expr);

impl ScalarExpr {
    pub fn new(e: Expr) -> Option<Self> {
        e.is_scalar().then_some(Self(e))
    }

    pub fn expr(&self) -> &Expr {
        &self.0
    }

    pub fn into_expr(self) -> Expr {
        self.0
    }

    pub fn eval(&self, env: &Env) -> Result<Complex64, EvalError> {
        self.0.eval(env)
    }

    pub fn conj(&self) -> Self {
        Self(self.0.conj())
    }

    pub fn differentiate_t(&self) -> Self {
        Self(super::diff::differentiate_t(&self.0))
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
