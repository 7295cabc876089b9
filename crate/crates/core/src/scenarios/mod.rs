//! Scenario files: a Hamiltonian, a candidate conserved operator, a
//! representation and the list of checks to run on them.

mod grid;
mod run;

use std::collections::BTreeMap;
use std::path::Path;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Deserialize;

pub use grid::{parse_grid, parse_values, GridOverride};
pub use run::{default_s, default_t, run, run_check, Overrides, RunError};

use crate::expr::{parse_with, Declared, Env, Expr, OpLeaf, ParseError};
use crate::gauss::GaussRat;
use crate::numeric::{NumericError, Representation};
use crate::weyl::{AnsatzTerm, OperatorPoly};

pub const SCHEMA: &str = "qnoether-scenario/1";

pub const BUILTIN_NAMES: &[&str] = &["free-galilean", "uniform-field-galilean", "uniform-field-dilation", "spin-precession"];

fn builtin_source(name: &str) -> Option<&'static str> {
    Some(match name {
        "free-galilean" => include_str!("builtin/free-galilean.toml"),
        "uniform-field-galilean" => include_str!("builtin/uniform-field-galilean.toml"),
        "uniform-field-dilation" => include_str!("builtin/uniform-field-dilation.toml"),
        "spin-precession" => include_str!("builtin/spin-precession.toml"),
        _ => return None,
    })
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("unknown builtin scenario {0:?}")]
    UnknownBuiltin(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("{field}: {source}")]
    Expression { field: String, source: ParseError },
    #[error("check {check}: {reason}")]
    Inapplicable { check: String, reason: String },
}

/// Exact rational or floating-point parameter value.
#[derive(Clone, Debug, PartialEq)]
pub enum ParamValue {
    Rational(BigRational),
    Float(f64),
}

impl ParamValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            ParamValue::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            ParamValue::Float(f) => *f,
        }
    }

    /// Accepts `3`, `-3/2` as exact rationals and anything else `f64` parses.
    pub fn parse(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Ok(r) = text.parse::<BigRational>() {
            if !r.denom().eq(&0.into()) {
                return Some(ParamValue::Rational(r));
            }
        }
        text.parse::<f64>().ok().filter(|f| f.is_finite()).map(ParamValue::Float)
    }
}

impl std::fmt::Display for ParamValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamValue::Rational(r) => write!(f, "{r}"),
            ParamValue::Float(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepSpec {
    SpinHalf,
    Oscillator { dimension: usize, trusted: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CheckKind {
    SymbolicConservation,
    NumericInvariance,
    ConjugationClosedForm,
    SymmetryImage,
    Stationarity,
    GeneratorExtraction,
}

impl CheckKind {
    pub const ALL: [CheckKind; 6] = [
        CheckKind::SymbolicConservation,
        CheckKind::NumericInvariance,
        CheckKind::ConjugationClosedForm,
        CheckKind::SymmetryImage,
        CheckKind::Stationarity,
        CheckKind::GeneratorExtraction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::SymbolicConservation => "symbolic-conservation",
            CheckKind::NumericInvariance => "numeric-invariance",
            CheckKind::ConjugationClosedForm => "conjugation-closed-form",
            CheckKind::SymmetryImage => "symmetry-image",
            CheckKind::Stationarity => "stationarity",
            CheckKind::GeneratorExtraction => "generator-extraction",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn is_symbolic(self) -> bool {
        matches!(self, CheckKind::SymbolicConservation)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Symbolic,
    Numeric,
}

/// Whether a stationarity check expects phase-only evolution or a control
/// trajectory that must move.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expect {
    Stationary,
    Moving,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckSpec {
    pub kind: CheckKind,
    /// Report label; defaults to the kind name.
    pub label: String,
    pub mode: Mode,
    pub expect: Expect,
    pub tolerance: Option<f64>,
    pub t: Option<Vec<f64>>,
    pub s: Option<Vec<f64>>,
    pub dt: Option<f64>,
    pub ds: Option<f64>,
    pub t_end: Option<f64>,
    pub extrapolate: bool,
    pub initial: usize,
}

/// `U_s⁻¹ target U_s = target + Σ_k (e^{rates_k s} - 1) terms_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedForm {
    pub target: Expr,
    pub rates: Vec<GaussRat>,
    pub terms: Vec<Expr>,
}

impl ClosedForm {
    pub fn ansatz(&self) -> Result<(OperatorPoly, Vec<AnsatzTerm>), crate::weyl::WeylError> {
        let y = crate::weyl::lower(&self.target)?;
        let mut out = Vec::with_capacity(self.terms.len());
        for (rate, term) in self.rates.iter().zip(&self.terms) {
            out.push(AnsatzTerm { rate: rate.clone(), term: crate::weyl::lower(term)? });
        }
        Ok((y, out))
    }

    /// The closed form as an expression in the free parameter `s`.
    pub fn as_expr(&self) -> Expr {
        let mut sum = vec![self.target.clone()];
        for (rate, term) in self.rates.iter().zip(&self.terms) {
            let arg = Expr::Product(vec![Expr::Const(rate.clone()), Expr::param("s")]).canonical();
            let bracket = Expr::Sum(vec![Expr::func(crate::expr::Func::Exp, arg), Expr::int(-1)]);
            sum.push(Expr::Product(vec![bracket, term.clone()]));
        }
        Expr::Sum(sum).canonical()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: Option<String>,
    pub hbar: ParamValue,
    pub params: BTreeMap<String, ParamValue>,
    pub hamiltonian: Expr,
    /// Generator as written, without the gauge term.
    pub generator: Expr,
    pub gauge: Option<Expr>,
    pub representation: RepSpec,
    pub checks: Vec<CheckSpec>,
    pub closed_forms: Vec<ClosedForm>,
}

impl Scenario {
    /// `generator + gauge`.
    pub fn full_generator(&self) -> Expr {
        match &self.gauge {
            Some(f) => Expr::Sum(vec![self.generator.clone(), f.clone()]).canonical(),
            None => self.generator.clone(),
        }
    }

    pub fn env(&self) -> Env {
        let mut env = Env::new(self.hbar.to_f64());
        for (k, v) in &self.params {
            env = env.with_param(k, v.to_f64());
        }
        env
    }

    pub fn build_representation(&self) -> Result<Representation, NumericError> {
        match self.representation {
            RepSpec::SpinHalf => Ok(Representation::spin_half(self.env())),
            RepSpec::Oscillator { dimension, trusted } => Representation::oscillator(dimension, trusted, self.env()),
        }
    }

    /// Replace parameter values, keeping the set of declared names fixed.
    pub fn set_param(&mut self, name: &str, value: ParamValue) -> Result<(), LoadError> {
        if name == "hbar" {
            self.hbar = value;
        } else if let Some(slot) = self.params.get_mut(name) {
            *slot = value;
        } else {
            return Err(LoadError::Schema(format!("parameter {name:?} is not declared by scenario {}", self.name)));
        }
        Ok(())
    }
}

pub fn builtin(name: &str) -> Result<Scenario, LoadError> {
    let src = builtin_source(name).ok_or_else(|| LoadError::UnknownBuiltin(name.to_string()))?;
    from_toml(src)
}

pub fn load(path: impl AsRef<Path>) -> Result<Scenario, LoadError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| LoadError::Io { path: path.display().to_string(), source })?;
    from_toml(&text)
}

/// Builtin name or path to a scenario file.
pub fn resolve(reference: &str) -> Result<Scenario, LoadError> {
    if builtin_source(reference).is_some() {
        builtin(reference)
    } else {
        load(reference)
    }
}

// ---- file format -------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    schema: String,
    name: String,
    description: Option<String>,
    params: BTreeMap<String, RawValue>,
    operators: RawOperators,
    representation: RawRepresentation,
    #[serde(default)]
    checks: Vec<RawCheck>,
    #[serde(default)]
    closed_forms: Vec<RawClosedForm>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawValue {
    Int(i64),
    Float(f64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOperators {
    hamiltonian: String,
    generator: String,
    gauge: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRepresentation {
    kind: String,
    dimension: Option<usize>,
    trusted: Option<usize>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawGrid {
    List(Vec<f64>),
    Spec(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCheck {
    kind: String,
    label: Option<String>,
    mode: Option<String>,
    expect: Option<String>,
    tolerance: Option<f64>,
    t: Option<RawGrid>,
    s: Option<RawGrid>,
    dt: Option<f64>,
    ds: Option<f64>,
    t_end: Option<f64>,
    #[serde(default)]
    extrapolate: bool,
    initial: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClosedForm {
    target: String,
    rates: Vec<String>,
    terms: Vec<String>,
}

fn schema_err(msg: impl Into<String>) -> LoadError {
    LoadError::Schema(msg.into())
}

fn grid(field: &str, raw: Option<RawGrid>) -> Result<Option<Vec<f64>>, LoadError> {
    match raw {
        None => Ok(None),
        Some(RawGrid::List(v)) => Ok(Some(v)),
        Some(RawGrid::Spec(s)) => parse_values(&s).map(Some).map_err(|e| schema_err(format!("{field}: {e}"))),
    }
}

pub fn from_toml(text: &str) -> Result<Scenario, LoadError> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| schema_err(e.to_string().trim_end().to_string()))?;
    if raw.schema != SCHEMA {
        return Err(schema_err(format!("schema must be {SCHEMA:?}, found {:?}", raw.schema)));
    }

    let mut hbar = ParamValue::Rational(BigRational::from_integer(1.into()));
    let mut params = BTreeMap::new();
    for (k, v) in raw.params {
        let value = match v {
            RawValue::Int(i) => ParamValue::Rational(BigRational::from_integer(i.into())),
            RawValue::Float(f) => ParamValue::Float(f),
            RawValue::Text(s) => {
                ParamValue::parse(&s).ok_or_else(|| schema_err(format!("params.{k}: cannot read {s:?} as a number")))?
            }
        };
        if k == "hbar" {
            hbar = value;
            continue;
        }
        if crate::expr::is_reserved(&k) || k == "s" {
            return Err(schema_err(format!("params.{k}: reserved name")));
        }
        if !k.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(schema_err(format!("params.{k}: not an identifier")));
        }
        params.insert(k, value);
    }
    if hbar.to_f64() <= 0.0 {
        return Err(schema_err("params.hbar must be positive"));
    }

    let names: Vec<&str> = params.keys().map(String::as_str).collect();
    let expr = |field: &str, text: &str, extra: &[&str]| -> Result<Expr, LoadError> {
        let mut all = names.clone();
        all.extend_from_slice(extra);
        parse_with(text, Declared::Only(&all)).map_err(|source| LoadError::Expression { field: field.to_string(), source })
    };

    let hamiltonian = expr("operators.hamiltonian", &raw.operators.hamiltonian, &[])?;
    let generator = expr("operators.generator", &raw.operators.generator, &[])?;
    let gauge = match &raw.operators.gauge {
        Some(g) => {
            let f = expr("operators.gauge", g, &[])?;
            if !f.is_scalar() {
                return Err(schema_err("operators.gauge must be a scalar function of t"));
            }
            Some(f)
        }
        None => None,
    };

    let representation = match raw.representation.kind.as_str() {
        "spin-half" => RepSpec::SpinHalf,
        "oscillator-truncation" => {
            let dimension = raw.representation.dimension.unwrap_or(128);
            let trusted = raw.representation.trusted.unwrap_or(32);
            if dimension < 2 || trusted == 0 || trusted > dimension {
                return Err(schema_err(format!(
                    "representation: need 1 <= trusted <= dimension and dimension >= 2 (got {trusted}, {dimension})"
                )));
            }
            RepSpec::Oscillator { dimension, trusted }
        }
        other => {
            return Err(schema_err(format!(
                "representation.kind must be \"spin-half\" or \"oscillator-truncation\", found {other:?}"
            )))
        }
    };

    let mut closed_forms = Vec::new();
    for (i, cf) in raw.closed_forms.into_iter().enumerate() {
        let field = format!("closed_forms[{i}]");
        if cf.rates.len() != cf.terms.len() {
            return Err(schema_err(format!("{field}: {} rates but {} terms", cf.rates.len(), cf.terms.len())));
        }
        let target = expr(&format!("{field}.target"), &cf.target, &[])?;
        let mut rates = Vec::new();
        for (j, r) in cf.rates.iter().enumerate() {
            match expr(&format!("{field}.rates[{j}]"), r, &[])? {
                Expr::Const(c) => rates.push(c),
                _ => return Err(schema_err(format!("{field}.rates[{j}]: rate must be a numeric constant"))),
            }
        }
        let terms = cf
            .terms
            .iter()
            .enumerate()
            .map(|(j, t)| expr(&format!("{field}.terms[{j}]"), t, &[]))
            .collect::<Result<Vec<_>, _>>()?;
        closed_forms.push(ClosedForm { target, rates, terms });
    }

    let mut checks = Vec::new();
    for (i, c) in raw.checks.into_iter().enumerate() {
        let field = format!("checks[{i}]");
        let kind = CheckKind::from_name(&c.kind).ok_or_else(|| {
            let known: Vec<_> = CheckKind::ALL.iter().map(|k| k.name()).collect();
            schema_err(format!("{field}.kind: unknown check {:?} (expected one of {})", c.kind, known.join(", ")))
        })?;
        let mode = match c.mode.as_deref() {
            None if matches!(kind, CheckKind::SymbolicConservation | CheckKind::ConjugationClosedForm) => Mode::Symbolic,
            None => Mode::Numeric,
            Some("symbolic") => Mode::Symbolic,
            Some("numeric") => Mode::Numeric,
            Some(other) => return Err(schema_err(format!("{field}.mode: expected symbolic or numeric, found {other:?}"))),
        };
        let expect = match c.expect.as_deref() {
            None | Some("stationary") => Expect::Stationary,
            Some("moving") => Expect::Moving,
            Some(other) => return Err(schema_err(format!("{field}.expect: expected stationary or moving, found {other:?}"))),
        };
        for (name, v) in [("tolerance", c.tolerance), ("dt", c.dt), ("ds", c.ds), ("t_end", c.t_end)] {
            if let Some(v) = v {
                if !(v.is_finite() && (v > 0.0 || (name == "tolerance" && v == 0.0))) {
                    return Err(schema_err(format!("{field}.{name} must be positive, found {v}")));
                }
            }
        }
        checks.push(CheckSpec {
            kind,
            label: c.label.unwrap_or_else(|| kind.name().to_string()),
            mode,
            expect,
            tolerance: c.tolerance,
            t: grid(&format!("{field}.t"), c.t)?,
            s: grid(&format!("{field}.s"), c.s)?,
            dt: c.dt,
            ds: c.ds,
            t_end: c.t_end,
            extrapolate: c.extrapolate,
            initial: c.initial.unwrap_or(0),
        });
    }

    let sc = Scenario {
        name: raw.name,
        description: raw.description,
        hbar,
        params,
        hamiltonian,
        generator,
        gauge,
        representation,
        checks,
        closed_forms,
    };
    validate(&sc)?;
    Ok(sc)
}

fn lowerable(e: &Expr) -> Result<(), String> {
    crate::weyl::lower(e).map(|_| ()).map_err(|err| err.to_string())
}

fn validate(sc: &Scenario) -> Result<(), LoadError> {
    let inapplicable = |c: &CheckSpec, reason: String| LoadError::Inapplicable { check: c.label.clone(), reason };
    let a = sc.full_generator();
    let allowed: &[OpLeaf] = match sc.representation {
        RepSpec::SpinHalf => &[OpLeaf::Sx, OpLeaf::Sy, OpLeaf::Sz],
        RepSpec::Oscillator { .. } => &[OpLeaf::X, OpLeaf::P],
    };
    let dimension = match sc.representation {
        RepSpec::SpinHalf => 2,
        RepSpec::Oscillator { dimension, .. } => dimension,
    };
    for c in &sc.checks {
        let symbolic = c.kind.is_symbolic() || (c.kind == CheckKind::ConjugationClosedForm && c.mode == Mode::Symbolic);
        if c.kind.is_symbolic() && c.mode == Mode::Numeric {
            return Err(inapplicable(c, "symbolic-conservation has no numeric mode".into()));
        }
        if symbolic {
            for (what, e) in [("A", &a), ("H", &sc.hamiltonian)] {
                lowerable(e).map_err(|r| inapplicable(c, format!("{what}: {r}")))?;
            }
        } else {
            for (what, e) in [("A", &a), ("H", &sc.hamiltonian)] {
                if let Some(leaf) = e.operator_leaves().into_iter().find(|l| !allowed.contains(l)) {
                    return Err(inapplicable(
                        c,
                        format!("{what} uses {} which the {} representation lacks", leaf.name(), rep_name(sc.representation)),
                    ));
                }
            }
        }
        if c.kind == CheckKind::ConjugationClosedForm {
            if sc.closed_forms.is_empty() {
                return Err(inapplicable(c, "no closed_forms given".into()));
            }
            for cf in &sc.closed_forms {
                if symbolic {
                    cf.ansatz().map_err(|r| inapplicable(c, r.to_string()))?;
                } else if let Some(leaf) = cf.as_expr().operator_leaves().into_iter().find(|l| !allowed.contains(l)) {
                    return Err(inapplicable(c, format!("closed form uses {}", leaf.name())));
                }
            }
        }
        if matches!(c.kind, CheckKind::SymmetryImage | CheckKind::Stationarity) && c.initial >= dimension {
            return Err(inapplicable(c, format!("initial basis state {} outside dimension {dimension}", c.initial)));
        }
    }
    Ok(())
}

fn rep_name(r: RepSpec) -> &'static str {
    match r {
        RepSpec::SpinHalf => "spin-half",
        RepSpec::Oscillator { .. } => "oscillator-truncation",
    }
}

impl RepSpec {
    pub fn name(self) -> &'static str {
        rep_name(self)
    }
}
