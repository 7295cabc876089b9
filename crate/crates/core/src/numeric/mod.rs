//! Finite-dimensional representations, Hermitian exponentials and the
//! numerical invariance, propagation and stationarity checks.

mod checks;
mod family;
mod rep;
mod report;

pub use checks::{
    conjugation_check, conserved_family_defect, conserved_family_residual, exact_conservation_defect,
    extract_generator, extract_generator_extrapolated, image_trajectory, invariance_defect, invariance_residual,
    invariance_sweep, normalized, propagate, richardson, stationarity_check, symmetry_image_check,
    InvarianceFrame, StateTrajectory,
};
pub use family::{hermiticity_defect, unitarity_defect, OperatorFamily, Spectral, UnitaryFamily, HERMITIAN_TOL};
pub use rep::{CMatrix, CVector, RepKind, Representation};
pub use report::{Bound, Provenance, ResidualReport, Sample};

use crate::expr::EvalError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericError {
    #[error("operator {leaf} has no matrix in the {kind} representation")]
    LeafNotInRepresentation { leaf: &'static str, kind: &'static str },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("generator is not Hermitian (relative defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("linear solve failed at step {step}")]
    SolveFailed { step: usize },
    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
}
