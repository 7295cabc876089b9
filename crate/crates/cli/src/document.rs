use std::collections::BTreeMap;
use std::io::Write;

use qnoether::expr::print;
use qnoether::numeric::{Bound, ResidualReport};
use qnoether::scenarios::{RepSpec, Scenario};
use serde::Serialize;

pub const REPORT_SCHEMA: &str = "qnoether-report/1";

#[derive(Serialize)]
pub struct ReportDocument {
    pub schema: &'static str,
    pub scenario: ScenarioMeta,
    pub checks: Vec<CheckEntry>,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct ScenarioMeta {
    pub name: String,
    pub description: Option<String>,
    pub source: String,
    pub hbar: String,
    pub params: BTreeMap<String, String>,
    pub hamiltonian: String,
    pub generator: String,
    pub representation: String,
    pub dimension: Option<usize>,
    pub trusted: Option<usize>,
    pub seed: Option<u64>,
}

impl ScenarioMeta {
    pub fn new(sc: &Scenario, source: &str, seed: Option<u64>) -> Self {
        let (dimension, trusted) = match sc.representation {
            RepSpec::SpinHalf => (None, None),
            RepSpec::Oscillator { dimension, trusted } => (Some(dimension), Some(trusted)),
        };
        Self {
            name: sc.name.clone(),
            description: sc.description.clone(),
            source: source.to_string(),
            hbar: sc.hbar.to_string(),
            params: sc.params.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
            hamiltonian: print(&sc.hamiltonian),
            generator: print(&sc.full_generator()),
            representation: sc.representation.name().to_string(),
            dimension,
            trusted,
            seed,
        }
    }
}

#[derive(Serialize)]
pub struct CheckEntry {
    #[serde(flatten)]
    pub report: ResidualReport,
    pub wall_time_s: f64,
}

impl ReportDocument {
    pub fn new(scenario: ScenarioMeta, checks: Vec<CheckEntry>) -> Self {
        let pass = checks.iter().all(|c| c.report.pass);
        Self { schema: REPORT_SCHEMA, scenario, checks, pass }
    }

    pub fn write_csv(&self, out: impl Write) -> csv::Result<()> {
        #[derive(Serialize)]
        struct Row<'a> {
            check: &'a str,
            s: Option<f64>,
            t: f64,
            residual: f64,
            tolerance: f64,
            bound: Bound,
            pass: bool,
        }
        let mut w = csv::Writer::from_writer(out);
        for entry in &self.checks {
            let r = &entry.report;
            for sample in &r.samples {
                w.serialize(Row {
                    check: &r.check,
                    s: sample.s,
                    t: sample.t,
                    residual: sample.residual,
                    tolerance: r.tolerance,
                    bound: r.bound,
                    pass: r.pass,
                })?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn human(&self) -> String {
        let mut out = format!("scenario {} ({})\n", self.scenario.name, self.scenario.representation);
        let width = self.checks.iter().map(|c| c.report.check.len()).max().unwrap_or(0);
        for entry in &self.checks {
            let r = &entry.report;
            let verdict = if r.pass { "PASS" } else { "FAIL" };
            let detail = if r.samples.len() == 1 && r.samples[0].s.is_none() && r.tolerance == 0.0 {
                if r.max_residual == 0.0 {
                    "exact zero".to_string()
                } else {
                    format!("{} nonzero terms", r.max_residual)
                }
            } else {
                let (what, value, cmp) = match (r.bound, r.pass) {
                    (Bound::Upper, true) => ("max", r.max_residual, "<="),
                    (Bound::Upper, false) => ("max", r.max_residual, ">"),
                    (Bound::Lower, true) => ("min", r.min_residual, ">="),
                    (Bound::Lower, false) => ("min", r.min_residual, "<"),
                };
                format!("{what} {} {cmp} tol {}", sci(value), sci(r.tolerance))
            };
            out += &format!(
                "  {verdict}  {:width$}  {detail}  [{} samples, {:.2}s]\n",
                r.check,
                r.samples.len(),
                entry.wall_time_s
            );
            if let Some(w) = &r.witness {
                out += &format!("        witness: {w}\n");
            }
        }
        out += if self.pass { "overall: PASS\n" } else { "overall: FAIL\n" };
        out
    }
}

/// Scientific notation with three significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.2e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci_has_three_digits() {
        assert_eq!(sci(1.2345e-9), "1.23e-9");
        assert_eq!(sci(0.0), "0.00e0");
    }
}
