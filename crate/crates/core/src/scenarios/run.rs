use std::collections::BTreeMap;
use std::sync::Arc;

use super::{CheckKind, CheckSpec, Expect, GridOverride, Mode, Scenario};
use crate::expr::print;
use crate::numeric::{
    self, conjugation_check, image_trajectory, invariance_sweep, propagate, stationarity_check, symmetry_image_check,
    Bound, CVector, NumericError, OperatorFamily, Provenance, Representation, ResidualReport, Sample, UnitaryFamily,
};
use crate::weyl::{self, conservation_residual, verify_exponential_ansatz, WeylError};

pub const DEFAULT_DT_FD: f64 = 1e-4;
pub const DEFAULT_DS: f64 = 1e-3;
pub const DEFAULT_DT_PROPAGATION: f64 = 1e-3;
pub const DEFAULT_T_END: f64 = 1.0;

pub fn default_t() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

pub fn default_s() -> Vec<f64> {
    vec![-1.0, -0.5, 0.0, 0.5, 1.0]
}

fn default_tolerance(c: &CheckSpec) -> f64 {
    match (c.kind, c.mode, c.expect) {
        (CheckKind::SymbolicConservation, ..) | (CheckKind::ConjugationClosedForm, Mode::Symbolic, _) => 0.0,
        (CheckKind::ConjugationClosedForm, Mode::Numeric, _) => 1e-6,
        (CheckKind::NumericInvariance, ..) => 1e-8,
        (CheckKind::SymmetryImage, ..) => 1e-7,
        (CheckKind::Stationarity, _, Expect::Stationary) => 1e-9,
        (CheckKind::Stationarity, _, Expect::Moving) => 0.4,
        (CheckKind::GeneratorExtraction, ..) => 1e-7,
    }
}

/// Run-time replacements applied on top of the scenario file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    /// Keyed by check label or kind name.
    pub tolerances: BTreeMap<String, f64>,
    pub grid: GridOverride,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("check {check}: {source}")]
    Numeric { check: String, source: NumericError },
    #[error("check {check}: {source}")]
    Weyl { check: String, source: WeylError },
}

/// Every requested check, in file order.
pub fn run(sc: &Scenario, overrides: &Overrides) -> Result<Vec<ResidualReport>, RunError> {
    let rep = Arc::new(
        sc.build_representation()
            .map_err(|source| RunError::Numeric { check: "representation".into(), source })?,
    );
    let mut out = Vec::new();
    for c in &sc.checks {
        out.extend(run_check(sc, &rep, c, overrides)?);
    }
    Ok(out)
}

struct Ctx<'a> {
    sc: &'a Scenario,
    rep: &'a Arc<Representation>,
    check: &'a CheckSpec,
    tolerance: f64,
    ts: Vec<f64>,
    ss: Vec<f64>,
}

impl Ctx<'_> {
    fn provenance(&self, dt: Option<f64>, ds: Option<f64>) -> Provenance {
        let (representation, dimension, trusted) = if self.check.kind.is_symbolic() || self.check.mode == Mode::Symbolic {
            (None, None, None)
        } else {
            (Some(self.sc.representation.name().to_string()), Some(self.rep.dimension()), Some(self.rep.trusted()))
        };
        Provenance {
            scenario: self.sc.name.clone(),
            params: self.sc.params.iter().map(|(k, v)| (k.clone(), v.to_f64())).collect(),
            hbar: self.sc.hbar.to_f64(),
            representation,
            dimension,
            trusted,
            dt,
            ds,
        }
    }

    fn numeric<T>(&self, r: Result<T, NumericError>) -> Result<T, RunError> {
        r.map_err(|source| RunError::Numeric { check: self.check.label.clone(), source })
    }

    fn weyl<T>(&self, r: Result<T, WeylError>) -> Result<T, RunError> {
        r.map_err(|source| RunError::Weyl { check: self.check.label.clone(), source })
    }

    fn family(&self, e: &crate::expr::Expr) -> OperatorFamily {
        OperatorFamily::new(e.clone(), self.rep.clone())
    }

    fn initial_state(&self) -> CVector {
        let mut psi = CVector::zeros(self.rep.dimension());
        psi[self.check.initial] = num_complex::Complex64::new(1.0, 0.0);
        psi
    }

    fn propagation(&self) -> (f64, usize) {
        let dt = self.check.dt.unwrap_or(DEFAULT_DT_PROPAGATION);
        let t_end = self.check.t_end.unwrap_or(DEFAULT_T_END);
        let steps = (t_end / dt).round().max(1.0) as usize;
        (t_end / steps as f64, steps)
    }
}

pub fn run_check(
    sc: &Scenario,
    rep: &Arc<Representation>,
    c: &CheckSpec,
    overrides: &Overrides,
) -> Result<Vec<ResidualReport>, RunError> {
    let tolerance = overrides
        .tolerances
        .get(&c.label)
        .or_else(|| overrides.tolerances.get(c.kind.name()))
        .copied()
        .or(c.tolerance)
        .unwrap_or_else(|| default_tolerance(c));
    let ts = overrides.grid.t.clone().or_else(|| c.t.clone()).unwrap_or_else(default_t);
    let ss = overrides.grid.s.clone().or_else(|| c.s.clone()).unwrap_or_else(default_s);
    let cx = Ctx { sc, rep, check: c, tolerance, ts, ss };
    let a = sc.full_generator();
    let label = c.label.as_str();

    Ok(match (c.kind, c.mode) {
        (CheckKind::SymbolicConservation, _) => {
            let ap = cx.weyl(weyl::lower(&a))?;
            let hp = cx.weyl(weyl::lower(&sc.hamiltonian))?;
            let r = conservation_residual(&ap, &hp);
            let witness = (!r.is_zero()).then(|| r.to_string());
            vec![ResidualReport::exact(label, r.keys().len(), witness, cx.provenance(None, None))]
        }
        (CheckKind::ConjugationClosedForm, Mode::Symbolic) => {
            let ap = cx.weyl(weyl::lower(&a))?;
            let mut out = Vec::new();
            for cf in &sc.closed_forms {
                let (y, ansatz) = cx.weyl(cf.ansatz())?;
                let verdict = cx.weyl(verify_exponential_ansatz(&ap, &y, &ansatz))?;
                let nonzero = verdict.eigen_residuals.iter().chain([&verdict.initial_residual]).filter(|r| !r.is_zero()).count();
                let witness = verdict.witness().map(|w| w.to_string());
                let name = format!("{label}[{}]", print(&cf.target));
                out.push(ResidualReport::exact(&name, nonzero, witness, cx.provenance(None, None)));
            }
            out
        }
        (CheckKind::ConjugationClosedForm, Mode::Numeric) => {
            let u = UnitaryFamily::new(cx.family(&a));
            let grid: Vec<(f64, f64)> = cx.ts.iter().flat_map(|&t| cx.ss.iter().map(move |&s| (s, t))).collect();
            let mut out = Vec::new();
            for cf in &sc.closed_forms {
                let samples = cx.numeric(conjugation_check(&u, &cf.target, &cf.as_expr(), &grid))?;
                let name = format!("{label}[{}]", print(&cf.target));
                out.push(ResidualReport::new(&name, samples, cx.tolerance, Bound::Upper, cx.provenance(None, None)));
            }
            out
        }
        (CheckKind::NumericInvariance, _) => {
            let dt = c.dt.unwrap_or(DEFAULT_DT_FD);
            let h = cx.family(&sc.hamiltonian);
            let u = UnitaryFamily::new(cx.family(&a));
            let samples = cx.numeric(invariance_sweep(&h, &u, &cx.ts, &cx.ss, dt, c.extrapolate))?;
            vec![ResidualReport::new(label, samples, cx.tolerance, Bound::Upper, cx.provenance(Some(dt), None))]
        }
        (CheckKind::SymmetryImage, _) => {
            let h = cx.family(&sc.hamiltonian);
            let u = UnitaryFamily::new(cx.family(&a));
            let (dt, steps) = cx.propagation();
            let traj = cx.numeric(propagate(&h, &cx.initial_state(), 0.0, dt, steps))?;
            let mut samples = Vec::new();
            for &s in &cx.ss {
                samples.extend(cx.numeric(symmetry_image_check(&h, &u, s, &traj))?);
            }
            vec![ResidualReport::new(label, samples, cx.tolerance, Bound::Upper, cx.provenance(Some(dt), None))]
        }
        (CheckKind::Stationarity, _) => {
            let h = cx.family(&sc.hamiltonian);
            let u = UnitaryFamily::new(cx.family(&a));
            let (dt, steps) = cx.propagation();
            let traj = cx.numeric(propagate(&h, &cx.initial_state(), 0.0, dt, steps))?;
            let ss = c.s.clone().or_else(|| overrides.grid.s.clone()).unwrap_or_else(|| vec![0.0]);
            let mut samples = Vec::new();
            for s in ss {
                let image = cx.numeric(image_trajectory(&u, s, &traj))?;
                let per_t = stationarity_check(&image);
                match c.expect {
                    Expect::Stationary => samples.extend(per_t.into_iter().map(|p| Sample { s: Some(s), ..p })),
                    Expect::Moving => {
                        let peak = per_t.into_iter().max_by(|x, y| x.residual.total_cmp(&y.residual)).unwrap();
                        samples.push(Sample { s: Some(s), ..peak });
                    }
                }
            }
            let bound = match c.expect {
                Expect::Stationary => Bound::Upper,
                Expect::Moving => Bound::Lower,
            };
            vec![ResidualReport::new(label, samples, cx.tolerance, bound, cx.provenance(Some(dt), None))]
        }
        (CheckKind::GeneratorExtraction, _) => {
            let ds = c.ds.unwrap_or(DEFAULT_DS);
            let fam = cx.family(&a);
            let u = UnitaryFamily::new(fam.clone());
            let mut samples = Vec::new();
            for &t in &cx.ts {
                let est = if c.extrapolate {
                    numeric::extract_generator_extrapolated(&u, t, ds)
                } else {
                    numeric::extract_generator(&u, t, ds)
                };
                let est = cx.numeric(est)?;
                let exact = cx.numeric(fam.at(t))?;
                samples.push(Sample { s: None, t, residual: numeric::normalized(rep, &(est - &exact), &exact) });
            }
            vec![ResidualReport::new(label, samples, cx.tolerance, Bound::Upper, cx.provenance(None, Some(ds)))]
        }
    })
}
