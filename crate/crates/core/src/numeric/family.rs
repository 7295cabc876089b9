use std::sync::Arc;

use nalgebra::DVector;

use super::rep::{c, CMatrix, Representation};
use super::NumericError;
use crate::expr::{differentiate_t, Expr};

/// Relative Frobenius tolerance for treating a materialized matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// `t ↦ A(t)` in a fixed representation, with the exact time derivative.
#[derive(Clone, Debug)]
pub struct OperatorFamily {
    source: Expr,
    derivative: Expr,
    rep: Arc<Representation>,
}

impl OperatorFamily {
    pub fn new(source: Expr, rep: Arc<Representation>) -> Self {
        let derivative = differentiate_t(&source);
        Self { source, derivative, rep }
    }

    pub fn source(&self) -> &Expr {
        &self.source
    }

    pub fn derivative(&self) -> &Expr {
        &self.derivative
    }

    pub fn rep(&self) -> &Arc<Representation> {
        &self.rep
    }

    pub fn is_time_dependent(&self) -> bool {
        self.source.contains_time()
    }

    pub fn at(&self, t: f64) -> Result<CMatrix, NumericError> {
        self.rep.materialize(&self.source, t)
    }

    pub fn dt_at(&self, t: f64) -> Result<CMatrix, NumericError> {
        self.rep.materialize(&self.derivative, t)
    }

    /// `‖A - A†‖_F / max(1, ‖A‖_F)` at time `t`.
    pub fn hermiticity_defect(&self, t: f64) -> Result<f64, NumericError> {
        let a = self.at(t)?;
        Ok(hermiticity_defect(&a))
    }
}

pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    (a - a.adjoint()).norm() / a.norm().max(1.0)
}

/// Eigendecomposition `A = Q diag(λ) Q†` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Spectral {
    pub vectors: CMatrix,
    pub values: DVector<f64>,
    hbar: f64,
}

impl Spectral {
    pub fn new(a: &CMatrix, hbar: f64) -> Result<Self, NumericError> {
        let defect = hermiticity_defect(a);
        if defect > HERMITIAN_TOL {
            return Err(NumericError::NotHermitian { defect });
        }
        let sym = (a + a.adjoint()) * c(0.5, 0.0);
        let eig = sym.symmetric_eigen();
        Ok(Self { vectors: eig.eigenvectors, values: eig.eigenvalues, hbar })
    }

    /// `exp(-i s A / hbar)`.
    pub fn unitary(&self, s: f64) -> CMatrix {
        let q = &self.vectors;
        let mut scaled = q.clone();
        for (j, lambda) in self.values.iter().enumerate() {
            let phase = c(0.0, -s * lambda / self.hbar).exp();
            for v in scaled.column_mut(j).iter_mut() {
                *v *= phase;
            }
        }
        scaled * q.adjoint()
    }
}

/// `(s, t) ↦ U_s(t) = exp(-i s A(t) / hbar)`, pointwise in `t`.
#[derive(Clone, Debug)]
pub struct UnitaryFamily {
    generator: OperatorFamily,
}

impl UnitaryFamily {
    pub fn new(generator: OperatorFamily) -> Self {
        Self { generator }
    }

    pub fn generator(&self) -> &OperatorFamily {
        &self.generator
    }

    pub fn rep(&self) -> &Arc<Representation> {
        self.generator.rep()
    }

    pub fn spectral(&self, t: f64) -> Result<Spectral, NumericError> {
        Spectral::new(&self.generator.at(t)?, self.rep().hbar())
    }

    pub fn at(&self, s: f64, t: f64) -> Result<CMatrix, NumericError> {
        Ok(self.spectral(t)?.unitary(s))
    }
}

/// `‖U†U - I‖_F`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    (u.adjoint() * u - CMatrix::identity(n, n)).norm()
}
