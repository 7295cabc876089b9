use std::fs::File;
use std::io::BufWriter;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use qnoether::expr::{parse_with, Declared, Env, Expr, OpLeaf};
use qnoether::numeric::{exact_conservation_defect, normalized, OperatorFamily, Representation};
use qnoether::scenarios::{
    self, default_s, default_t, parse_grid, parse_values, run_check, CheckKind, Mode, Overrides, ParamValue, Scenario,
    BUILTIN_NAMES,
};
use qnoether::weyl::{self, conjugate_truncated, conservation_residual, verify_exponential_ansatz, AnsatzTerm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::document::{sci, CheckEntry, ReportDocument, ScenarioMeta};
use crate::{CheckArgs, ConjugateArgs, ResidualArgs, ResidualMode, SchemaKind};

const SCENARIO_SCHEMA_JSON: &str = include_str!("../schemas/scenario.schema.json");
const REPORT_SCHEMA_JSON: &str = include_str!("../schemas/report.schema.json");

/// Random samples appended to each seeded axis.
const SEEDED_SAMPLES: usize = 3;

fn split_assignment(item: &str) -> Result<(String, String)> {
    let (k, v) = item.split_once('=').ok_or_else(|| anyhow!("expected NAME=VALUE, found {item:?}"))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() || v.is_empty() {
        bail!("expected NAME=VALUE, found {item:?}");
    }
    Ok((k.to_string(), v.to_string()))
}

fn parse_params(list: &str) -> Result<Vec<(String, ParamValue)>> {
    list.split(',')
        .filter(|item| !item.trim().is_empty())
        .map(|item| {
            let (k, v) = split_assignment(item)?;
            let value = ParamValue::parse(&v).ok_or_else(|| anyhow!("--params {k}: cannot read {v:?} as a number"))?;
            Ok((k, value))
        })
        .collect()
}

pub fn check(args: &CheckArgs) -> Result<bool> {
    let mut sc = scenarios::resolve(&args.scenario)?;
    if let Some(list) = &args.params {
        for (k, v) in parse_params(list)? {
            sc.set_param(&k, v)?;
        }
    }
    let mut overrides = Overrides::default();
    for item in &args.tolerances {
        let (name, value) = split_assignment(item)?;
        let known = sc.checks.iter().any(|c| c.label == name || c.kind.name() == name);
        if !known {
            bail!("--tol {name}: scenario {} has no check with that label or kind", sc.name);
        }
        let value: f64 = value.parse().with_context(|| format!("--tol {name}: not a number"))?;
        if !(value.is_finite() && value >= 0.0) {
            bail!("--tol {name}: tolerance must be finite and non-negative");
        }
        overrides.tolerances.insert(name, value);
    }
    if let Some(spec) = &args.grid {
        overrides.grid = parse_grid(spec).map_err(|e| anyhow!("--grid: {e}"))?;
    }
    if let Some(seed) = args.seed {
        seed_grids(&mut sc, &mut overrides, seed);
    }

    let rep = Arc::new(sc.build_representation()?);
    let mut entries = Vec::new();
    for c in &sc.checks {
        let start = Instant::now();
        let reports = run_check(&sc, &rep, c, &overrides)?;
        let wall_time_s = start.elapsed().as_secs_f64();
        entries.extend(reports.into_iter().map(|report| CheckEntry { report, wall_time_s }));
    }
    let doc = ReportDocument::new(ScenarioMeta::new(&sc, &args.scenario, args.seed), entries);

    print!("{}", doc.human());
    if let Some(path) = &args.json {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        serde_json::to_writer_pretty(BufWriter::new(file), &doc)?;
    }
    if let Some(path) = &args.csv {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        doc.write_csv(BufWriter::new(file))?;
    }
    Ok(doc.pass)
}

/// Fold the grid override into every check, then append seeded uniform draws
/// inside the range of each swept axis.
fn seed_grids(sc: &mut Scenario, overrides: &mut Overrides, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = std::mem::take(&mut overrides.grid);
    for c in &mut sc.checks {
        let numeric_conjugation = c.kind == CheckKind::ConjugationClosedForm && c.mode == Mode::Numeric;
        let sweeps_t = numeric_conjugation || matches!(c.kind, CheckKind::NumericInvariance | CheckKind::GeneratorExtraction);
        let sweeps_s = numeric_conjugation || matches!(c.kind, CheckKind::NumericInvariance | CheckKind::SymmetryImage);
        if c.kind == CheckKind::Stationarity {
            c.s = c.s.take().or_else(|| grid.s.clone());
        } else {
            c.s = grid.s.clone().or(c.s.take());
        }
        c.t = grid.t.clone().or(c.t.take());
        if sweeps_t {
            let mut ts = c.t.take().unwrap_or_else(default_t);
            append_draws(&mut ts, &mut rng);
            c.t = Some(ts);
        }
        if sweeps_s {
            let mut ss = c.s.take().unwrap_or_else(default_s);
            append_draws(&mut ss, &mut rng);
            c.s = Some(ss);
        }
    }
}

fn append_draws(values: &mut Vec<f64>, rng: &mut ChaCha8Rng) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo < hi {
        values.extend((0..SEEDED_SAMPLES).map(|_| rng.random_range(lo..=hi)));
    }
}

struct Parsed {
    exprs: Vec<Expr>,
    env: Env,
}

fn parse_inputs(inputs: &[(&str, &str)], params: Option<&str>) -> Result<Parsed> {
    let values = params.map(parse_params).transpose()?;
    let mut env = Env::new(1.0);
    let mut names = Vec::new();
    for (k, v) in values.iter().flatten() {
        if k == "hbar" {
            env.hbar = v.to_f64();
        } else {
            env = env.with_param(k, v.to_f64());
            names.push(k.as_str());
        }
    }
    let declared = if values.is_some() { Declared::Only(&names) } else { Declared::Any };
    let exprs = inputs
        .iter()
        .map(|(flag, text)| parse_with(text, declared).with_context(|| format!("{flag} {text:?}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(Parsed { exprs, env })
}

fn lower(flag: &str, e: &Expr) -> Result<weyl::OperatorPoly> {
    weyl::lower(e).with_context(|| flag.to_string())
}

pub fn residual(args: &ResidualArgs) -> Result<bool> {
    let Parsed { exprs, env } = parse_inputs(&[("--A", &args.a), ("--H", &args.h)], args.params.as_deref())?;
    let (a, h) = (&exprs[0], &exprs[1]);
    match args.mode {
        ResidualMode::Symbolic => {
            println!("{}", conservation_residual(&lower("--A", a)?, &lower("--H", h)?));
        }
        ResidualMode::Numeric => {
            let leaves: Vec<OpLeaf> = a.operator_leaves().union(&h.operator_leaves()).copied().collect();
            let spin = leaves.iter().any(|l| l.is_spin());
            if spin && leaves.iter().any(|l| !l.is_spin()) {
                bail!("cannot mix spin operators with x and p in one representation");
            }
            let rep = if spin {
                Representation::spin_half(env)
            } else {
                Representation::oscillator(args.dimension, args.trusted, env)?
            };
            let rep = Arc::new(rep);
            let ts = match &args.grid {
                Some(spec) => parse_values(spec.strip_prefix("t=").unwrap_or(spec)).map_err(|e| anyhow!("--grid: {e}"))?,
                None => default_t(),
            };
            let af = OperatorFamily::new(a.clone(), rep.clone());
            let hf = OperatorFamily::new(h.clone(), rep.clone());
            let mut max = 0.0f64;
            for &t in &ts {
                let defect = exact_conservation_defect(&af, &hf, t)?;
                max = max.max(normalized(&rep, &defect, &hf.at(t)?));
            }
            println!("{} (max over {} t samples, {})", sci(max), ts.len(), rep.kind().name());
        }
    }
    Ok(true)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnsatzFile {
    target: Option<String>,
    rates: Vec<String>,
    terms: Vec<String>,
}

pub fn conjugate(args: &ConjugateArgs) -> Result<bool> {
    let file = match &args.ansatz {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let f: AnsatzFile = toml::from_str(&text).with_context(|| format!("ansatz file {}", path.display()))?;
            if f.rates.len() != f.terms.len() {
                bail!("ansatz file: {} rates but {} terms", f.rates.len(), f.terms.len());
            }
            Some(f)
        }
        None => None,
    };
    let y_text = args
        .y
        .as_deref()
        .or(file.as_ref().and_then(|f| f.target.as_deref()))
        .ok_or_else(|| anyhow!("no target operator: pass --Y or set `target` in the ansatz file"))?;
    let Parsed { exprs, .. } = parse_inputs(&[("--A", &args.a), ("--Y", y_text)], None)?;
    let a = lower("--A", &exprs[0])?;
    let y = lower("--Y", &exprs[1])?;

    let Some(file) = file else {
        let order = args.order.unwrap_or(0);
        for (k, c) in conjugate_truncated(&a, &y, order)?.iter().enumerate() {
            println!("C_{k} = {c}");
        }
        return Ok(true);
    };

    let mut ansatz = Vec::new();
    for (j, (rate, term)) in file.rates.iter().zip(&file.terms).enumerate() {
        let rate = match parse_with(rate, Declared::Any).with_context(|| format!("rates[{j}]"))? {
            Expr::Const(c) => c,
            _ => bail!("rates[{j}]: rate must be a numeric constant"),
        };
        let term = parse_with(term, Declared::Any).with_context(|| format!("terms[{j}]"))?;
        ansatz.push(AnsatzTerm { rate, term: lower(&format!("terms[{j}]"), &term)? });
    }
    let verdict = verify_exponential_ansatz(&a, &y, &ansatz)?;
    if verdict.pass {
        println!("PASS");
    } else {
        println!("FAIL");
        for (j, (r, t)) in verdict.eigen_residuals.iter().zip(&ansatz).enumerate() {
            if !r.is_zero() {
                println!("  terms[{j}] is not an eigenoperator with rate {}: residual {r}", t.rate);
            }
        }
        if !verdict.initial_residual.is_zero() {
            println!("  initial slope mismatch: residual {}", verdict.initial_residual);
        }
        if let Some(w) = verdict.witness() {
            println!("witness: {w}");
        }
    }
    Ok(verdict.pass)
}

pub fn list() -> Result<bool> {
    for name in BUILTIN_NAMES {
        let sc = scenarios::builtin(name)?;
        println!("{name:24} {}", sc.description.unwrap_or_default());
    }
    Ok(true)
}

pub fn schema(which: SchemaKind) -> Result<bool> {
    print!(
        "{}",
        match which {
            SchemaKind::Scenario => SCENARIO_SCHEMA_JSON,
            SchemaKind::Report => REPORT_SCHEMA_JSON,
        }
    );
    Ok(true)
}
