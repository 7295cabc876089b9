use std::collections::BTreeMap;

use serde::Serialize;

/// Which side of the tolerance a passing residual lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// Pass iff the max residual is at most the tolerance.
    Upper,
    /// Pass iff every sample is at least the tolerance (control runs that must fail to conserve).
    Lower,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub s: Option<f64>,
    pub t: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Provenance {
    pub scenario: String,
    pub params: BTreeMap<String, f64>,
    pub hbar: f64,
    pub representation: Option<String>,
    pub dimension: Option<usize>,
    pub trusted: Option<usize>,
    pub dt: Option<f64>,
    pub ds: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub check: String,
    pub samples: Vec<Sample>,
    pub max_residual: f64,
    pub min_residual: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub pass: bool,
    /// Nonzero exact residual or other counterexample, printed in the expression grammar.
    pub witness: Option<String>,
    pub provenance: Provenance,
}

impl ResidualReport {
    pub fn new(check: &str, samples: Vec<Sample>, tolerance: f64, bound: Bound, provenance: Provenance) -> Self {
        let max_residual = samples.iter().map(|s| s.residual).fold(0.0, f64::max);
        let min_residual = samples.iter().map(|s| s.residual).fold(f64::INFINITY, f64::min);
        // NaN residuals never pass
        let pass = !samples.iter().any(|s| s.residual.is_nan())
            && match bound {
                Bound::Upper => max_residual <= tolerance,
                Bound::Lower => !samples.is_empty() && min_residual >= tolerance,
            };
        let min_residual = if samples.is_empty() { 0.0 } else { min_residual };
        Self {
            check: check.to_string(),
            samples,
            max_residual,
            min_residual,
            tolerance,
            bound,
            pass,
            witness: None,
            provenance,
        }
    }

    /// Exact check: the residual is the number of nonzero terms, tolerance zero.
    pub fn exact(check: &str, nonzero_terms: usize, witness: Option<String>, provenance: Provenance) -> Self {
        let samples = vec![Sample { s: None, t: 0.0, residual: nonzero_terms as f64 }];
        let mut r = Self::new(check, samples, 0.0, Bound::Upper, provenance);
        r.witness = witness;
        r
    }
}
