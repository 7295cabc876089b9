use super::family::{OperatorFamily, Spectral, UnitaryFamily};
use super::rep::{c, CMatrix, CVector, Representation};
use super::report::Sample;
use super::NumericError;
use crate::expr::Expr;

/// `‖P r P‖_F / max(1, ‖P h P‖_F)` with `P` the trusted-subspace projector.
pub fn normalized(rep: &Representation, r: &CMatrix, h: &CMatrix) -> f64 {
    rep.project(r).norm() / rep.project(h).norm().max(1.0)
}

/// `(4 fine - coarse) / 3`: cancels the leading `h²` term of a central difference.
pub fn richardson(coarse: &CMatrix, fine: &CMatrix) -> CMatrix {
    (fine * c(4.0, 0.0) - coarse) * c(1.0 / 3.0, 0.0)
}

fn central_difference(plus: &CMatrix, minus: &CMatrix, h: f64) -> CMatrix {
    (plus - minus) * c(1.0 / (2.0 * h), 0.0)
}

fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Spectral data of `A` at `t` and `t ± dt`, shared by every `s` at that time.
pub struct InvarianceFrame {
    h: CMatrix,
    centre: Spectral,
    plus: Spectral,
    minus: Spectral,
    dt: f64,
    hbar: f64,
}

impl InvarianceFrame {
    pub fn new(h: &OperatorFamily, u: &UnitaryFamily, t: f64, dt: f64) -> Result<Self, NumericError> {
        Ok(Self {
            h: h.at(t)?,
            centre: u.spectral(t)?,
            plus: u.spectral(t + dt)?,
            minus: u.spectral(t - dt)?,
            dt,
            hbar: u.rep().hbar(),
        })
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.h
    }

    /// `U⁻¹ H U - H - i hbar U⁻¹ ∂U/∂t` with a central difference in `t`.
    pub fn defect(&self, s: f64) -> CMatrix {
        let u = self.centre.unitary(s);
        let u_inv = u.adjoint();
        let du = central_difference(&self.plus.unitary(s), &self.minus.unitary(s), self.dt);
        &u_inv * &self.h * &u - &self.h - u_inv * du * c(0.0, self.hbar)
    }
}

pub fn invariance_defect(
    h: &OperatorFamily,
    u: &UnitaryFamily,
    s: f64,
    t: f64,
    dt: f64,
) -> Result<CMatrix, NumericError> {
    Ok(InvarianceFrame::new(h, u, t, dt)?.defect(s))
}

/// Normalized invariance residual on the full space.
pub fn invariance_residual(h: &OperatorFamily, u: &UnitaryFamily, s: f64, t: f64, dt: f64) -> Result<f64, NumericError> {
    let frame = InvarianceFrame::new(h, u, t, dt)?;
    Ok(frame.defect(s).norm() / frame.h.norm().max(1.0))
}

/// Trusted-subspace invariance residual over a `t × s` grid, optionally
/// Richardson-extrapolated from steps `dt` and `dt/2`.
pub fn invariance_sweep(
    h: &OperatorFamily,
    u: &UnitaryFamily,
    ts: &[f64],
    ss: &[f64],
    dt: f64,
    extrapolate: bool,
) -> Result<Vec<Sample>, NumericError> {
    let rep = u.rep();
    let mut out = Vec::with_capacity(ts.len() * ss.len());
    for &t in ts {
        let coarse = InvarianceFrame::new(h, u, t, dt)?;
        let fine = if extrapolate { Some(InvarianceFrame::new(h, u, t, dt / 2.0)?) } else { None };
        for &s in ss {
            let r = match &fine {
                Some(f) => richardson(&coarse.defect(s), &f.defect(s)),
                None => coarse.defect(s),
            };
            out.push(Sample { s: Some(s), t, residual: normalized(rep, &r, &coarse.h) });
        }
    }
    Ok(out)
}

/// `i hbar ∂W/∂t + [W(t), H(t)]` with a central difference; `W` need not be Hermitian.
pub fn conserved_family_defect<W>(w: W, h: &OperatorFamily, t: f64, dt: f64) -> Result<CMatrix, NumericError>
where
    W: Fn(f64) -> Result<CMatrix, NumericError>,
{
    let hbar = h.rep().hbar();
    let dw = central_difference(&w(t + dt)?, &w(t - dt)?, dt);
    Ok(dw * c(0.0, hbar) + commutator(&w(t)?, &h.at(t)?))
}

pub fn conserved_family_residual<W>(w: W, h: &OperatorFamily, t: f64, dt: f64) -> Result<f64, NumericError>
where
    W: Fn(f64) -> Result<CMatrix, NumericError>,
{
    let r = conserved_family_defect(w, h, t, dt)?;
    Ok(normalized(h.rep(), &r, &h.at(t)?))
}

/// `i hbar dA/dt + [A, H]` using the exact derivative of the source expression.
pub fn exact_conservation_defect(a: &OperatorFamily, h: &OperatorFamily, t: f64) -> Result<CMatrix, NumericError> {
    let hbar = a.rep().hbar();
    Ok(a.dt_at(t)? * c(0.0, hbar) + commutator(&a.at(t)?, &h.at(t)?))
}

/// `i hbar (U_{ds} - U_{-ds}) / (2 ds)`, an `O(ds²)` estimate of `A(t)`.
pub fn extract_generator(u: &UnitaryFamily, t: f64, ds: f64) -> Result<CMatrix, NumericError> {
    let spec = u.spectral(t)?;
    Ok(extract_from(&spec, ds, u.rep().hbar()))
}

/// Richardson combination of the estimates at `ds` and `ds/2`.
pub fn extract_generator_extrapolated(u: &UnitaryFamily, t: f64, ds: f64) -> Result<CMatrix, NumericError> {
    let spec = u.spectral(t)?;
    let hbar = u.rep().hbar();
    Ok(richardson(&extract_from(&spec, ds, hbar), &extract_from(&spec, ds / 2.0, hbar)))
}

fn extract_from(spec: &Spectral, ds: f64, hbar: f64) -> CMatrix {
    central_difference(&spec.unitary(ds), &spec.unitary(-ds), ds) * c(0.0, hbar)
}

/// States on the uniform grid `t0 + n dt`, `n = 0..=steps`.
#[derive(Clone, Debug)]
pub struct StateTrajectory {
    pub t0: f64,
    pub dt: f64,
    pub states: Vec<CVector>,
}

impl StateTrajectory {
    pub fn time(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.dt
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &CVector {
        self.states.last().expect("trajectory holds the initial state")
    }
}

/// Crank–Nicolson with the Hamiltonian at step midpoints:
/// `(I + i dt H/2hbar) ψ_{n+1} = (I - i dt H/2hbar) ψ_n`.
pub fn propagate(
    h: &OperatorFamily,
    psi0: &CVector,
    t0: f64,
    dt: f64,
    steps: usize,
) -> Result<StateTrajectory, NumericError> {
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(NumericError::InvalidState(format!("initial state has norm {norm}")));
    }
    let rep = h.rep();
    let n = rep.dimension();
    let k = c(0.0, dt / (2.0 * rep.hbar()));
    let id = CMatrix::identity(n, n);
    let step_ops = |t: f64| -> Result<_, NumericError> {
        let hm = h.at(t)?;
        Ok(((&id + &hm * k).lu(), &id - &hm * k))
    };
    let cached = if h.is_time_dependent() { None } else { Some(step_ops(t0)?) };
    let mut states = Vec::with_capacity(steps + 1);
    states.push(psi0.clone());
    for step in 0..steps {
        let fresh;
        let (lu, rhs_op) = match &cached {
            Some(ops) => ops,
            None => {
                fresh = step_ops(t0 + (step as f64 + 0.5) * dt)?;
                &fresh
            }
        };
        let rhs = rhs_op * states.last().unwrap();
        let next = lu.solve(&rhs).ok_or(NumericError::SolveFailed { step })?;
        states.push(next);
    }
    Ok(StateTrajectory { t0, dt, states })
}

/// `φ_n = U_s(t_n) ψ_n`.
pub fn image_trajectory(u: &UnitaryFamily, s: f64, traj: &StateTrajectory) -> Result<StateTrajectory, NumericError> {
    let mut states = Vec::with_capacity(traj.len());
    for (n, psi) in traj.states.iter().enumerate() {
        states.push(u.at(s, traj.time(n))? * psi);
    }
    Ok(StateTrajectory { t0: traj.t0, dt: traj.dt, states })
}

/// `‖U_s(t_n) ψ_n - φ'_n‖` where `φ'` is propagated independently from `U_s(t_0) ψ_0`.
pub fn symmetry_image_check(
    h: &OperatorFamily,
    u: &UnitaryFamily,
    s: f64,
    traj: &StateTrajectory,
) -> Result<Vec<Sample>, NumericError> {
    let image = image_trajectory(u, s, traj)?;
    let direct = propagate(h, &image.states[0], traj.t0, traj.dt, traj.len() - 1)?;
    Ok(image
        .states
        .iter()
        .zip(&direct.states)
        .enumerate()
        .map(|(n, (a, b))| Sample { s: Some(s), t: traj.time(n), residual: (a - b).norm() })
        .collect())
}

/// `1 - |⟨ψ_0, ψ_n⟩|` per step; zero for phase-only evolution.
pub fn stationarity_check(traj: &StateTrajectory) -> Vec<Sample> {
    let psi0 = &traj.states[0];
    traj.states
        .iter()
        .enumerate()
        .map(|(n, psi)| Sample { s: None, t: traj.time(n), residual: 1.0 - psi0.dotc(psi).norm() })
        .collect()
}

/// Compares `U_s(t)† Y(t) U_s(t)` with a closed form in which the parameter
/// `s` is bound per sample, on the trusted subspace.
pub fn conjugation_check(
    u: &UnitaryFamily,
    y: &Expr,
    closed_form: &Expr,
    samples: &[(f64, f64)],
) -> Result<Vec<Sample>, NumericError> {
    let rep = u.rep();
    let mut last: Option<(f64, Spectral)> = None;
    let mut out = Vec::with_capacity(samples.len());
    for &(s, t) in samples {
        if last.as_ref().is_none_or(|(lt, _)| *lt != t) {
            last = Some((t, u.spectral(t)?));
        }
        let spec = &last.as_ref().unwrap().1;
        let um = spec.unitary(s);
        let lhs = um.adjoint() * rep.materialize(y, t)? * &um;
        let env = rep.env_at(t).with_param("s", s);
        let rhs = rep.materialize_in(closed_form, &env)?;
        out.push(Sample { s: Some(s), t, residual: normalized(rep, &(lhs - &rhs), &rhs) });
    }
    Ok(out)
}
