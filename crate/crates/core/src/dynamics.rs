//! Coupled evolution of the vortex position and the harmonic coefficients.
//!
//! With `eta = A alpha + B beta` and `mu = lambda^2 dx ^ dy`, the vortex
//! velocity solves `i_pdot mu = dR/2 + *eta`, i.e.
//!
//! ```text
//! lambda^2 xdot =  R_y / 2 + b_y A - a_y B
//! lambda^2 ydot = -R_x / 2 - b_x A + a_x B
//! ```
//!
//! and the harmonic coefficients follow
//!
//! ```text
//!  b_y Adot - a_y Bdot - ydot = b_x A - a_x B
//! -b_x Adot + a_x Bdot + xdot = b_y A - a_y B
//! ```
//!
//! These are the genus-1, unit-volume reading of the general system
//! `Adot_k - beta_k[pdot] = -(1/V) sum_j (A_j R_jk + B_j Q_jk)`,
//! `Bdot_k + alpha_k[pdot] = (1/V) sum_j (A_j P_jk + B_j R_kj)`; the
//! transpose on `R` is invisible when `R` is a scalar.
//!
//! `H = R(p)/2 + (1/2) int eta ^ *eta` is a first integral of the full
//! system. The incomplete mode freezes `eta`, leaving the vortex to follow
//! level sets of the Robin function when `eta = 0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{self, ConformalSpec, CovectorField, FieldError, PeriodicGrid, ScalarField};
use crate::geometry::{harmonic_basis, period_matrices, wrap_point, HarmonicCoeffs, LatticeBasis, PeriodMatrices, TorusPoint};

/// Residual below which a state counts as an equilibrium.
pub const EQUILIBRIUM_TOL: f64 = 1e-9;

/// Fixed-point tolerance and iteration cap of the implicit midpoint step.
pub const MIDPOINT_TOL: f64 = 1e-12;
pub const MIDPOINT_MAX_ITER: usize = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("implicit midpoint did not converge in {iterations} iterations (last update {update:e})")]
    NoConvergence { iterations: usize, update: f64 },
    #[error("invalid dynamics config: {0}")]
    InvalidConfig(&'static str),
    #[error("non-finite state")]
    NonFinite,
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Position and harmonic part evolve together.
    #[default]
    Full,
    /// Harmonic part frozen at its initial value.
    Incomplete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    #[default]
    Rk4,
    ImplicitMidpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VortexState {
    pub p: TorusPoint,
    pub eta: HarmonicCoeffs,
}

impl VortexState {
    pub fn new(lat: &LatticeBasis, x: f64, y: f64, eta: HarmonicCoeffs) -> Self {
        Self {
            p: wrap_point(lat, x, y),
            eta,
        }
    }

    fn as_array(&self) -> [f64; 4] {
        [self.p.x, self.p.y, self.eta.a, self.eta.b]
    }

    fn from_array(lat: &LatticeBasis, z: [f64; 4]) -> Self {
        Self::new(lat, z[0], z[1], HarmonicCoeffs::new(z[2], z[3]))
    }
}

/// Tangent vector `(xdot, ydot, Adot, Bdot)` on the phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Derivative {
    pub dx: f64,
    pub dy: f64,
    pub da: f64,
    pub db: f64,
}

impl Derivative {
    pub const fn new(dx: f64, dy: f64, da: f64, db: f64) -> Self {
        Self { dx, dy, da, db }
    }

    pub fn max_norm(&self) -> f64 {
        self.dx.abs().max(self.dy.abs()).max(self.da.abs()).max(self.db.abs())
    }

    fn as_array(&self) -> [f64; 4] {
        [self.dx, self.dy, self.da, self.db]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    pub mode: Mode,
    pub integrator: Integrator,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub record_every: usize,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Full,
            integrator: Integrator::Rk4,
            dt: 1e-3,
            t_final: 10.0,
            record_every: 1,
        }
    }
}

impl DynamicsConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(DynamicsError::InvalidConfig("dt > 0"));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(DynamicsError::InvalidConfig("T > 0"));
        }
        if self.record_every < 1 {
            return Err(DynamicsError::InvalidConfig("record_every >= 1"));
        }
        Ok(())
    }

    /// Number of fixed steps covering `[0, T]`.
    pub fn steps(&self) -> usize {
        // tolerate T/dt landing a hair below an integer
        (self.t_final / self.dt * (1.0 + 1e-12)).floor() as usize
    }
}

/// Metric data the flow needs: `lambda^2`, the Robin function and its
/// differential, plus the lattice period data.
#[derive(Debug, Clone)]
pub struct DynamicsFields {
    lambda2: ScalarField,
    robin: ScalarField,
    d_robin: CovectorField,
    periods: PeriodMatrices,
}

impl DynamicsFields {
    pub fn build(spec: &ConformalSpec, grid: &PeriodicGrid) -> Result<Self, FieldError> {
        Self::from_lambda2(field::sample_conformal_factor(spec, grid)?)
    }

    pub fn from_lambda2(lambda2: ScalarField) -> Result<Self, FieldError> {
        let robin = field::robin_field(&lambda2)?;
        let d_robin = field::differential(&robin);
        let periods = period_matrices(lambda2.grid().lattice());
        Ok(Self {
            lambda2,
            robin,
            d_robin,
            periods,
        })
    }

    pub fn lattice(&self) -> &LatticeBasis {
        self.lambda2.grid().lattice()
    }

    pub fn lambda2(&self) -> &ScalarField {
        &self.lambda2
    }

    pub fn robin(&self) -> &ScalarField {
        &self.robin
    }

    pub fn d_robin(&self) -> &CovectorField {
        &self.d_robin
    }

    pub fn periods(&self) -> PeriodMatrices {
        self.periods
    }

    pub fn lambda2_at(&self, p: &TorusPoint) -> f64 {
        field::eval_field(&self.lambda2, p)
    }

    pub fn robin_at(&self, p: &TorusPoint) -> f64 {
        field::eval_field(&self.robin, p)
    }

    /// `(R_x, R_y)` at `p`: the exact gradient of the interpolant used by
    /// [`DynamicsFields::robin_at`], so that `H` is a first integral of the
    /// discrete right-hand side and not only of the continuum one.
    pub fn robin_gradient_at(&self, p: &TorusPoint) -> (f64, f64) {
        let (_, gx, gy) = self.robin.value_and_gradient(p);
        (gx, gy)
    }
}

/// Vortex velocity `(xdot, ydot)`.
pub fn vortex_velocity(st: &VortexState, fields: &DynamicsFields) -> (f64, f64) {
    let lat = fields.lattice();
    let eta = st.eta.to_form(lat);
    let (rx, ry) = fields.robin_gradient_at(&st.p);
    let l2 = fields.lambda2_at(&st.p);
    ((0.5 * ry + eta.cx) / l2, (-0.5 * rx + eta.cy) / l2)
}

/// `(Adot, Bdot)` given the vortex velocity.
///
/// In full mode this inverts the unit-determinant system
/// `[[b_y, -a_y], [-b_x, a_x]] (Adot, Bdot) = (ydot + b_x A - a_x B, -xdot + b_y A - a_y B)`,
/// whose inverse is `[[a_x, a_y], [b_x, b_y]]`.
pub fn eta_rate(st: &VortexState, pdot: (f64, f64), lat: &LatticeBasis, mode: Mode) -> (f64, f64) {
    match mode {
        Mode::Incomplete => (0.0, 0.0),
        Mode::Full => {
            let ([ax, ay], [bx, by]) = (lat.a(), lat.b());
            let HarmonicCoeffs { a, b } = st.eta;
            let r1 = pdot.1 + bx * a - ax * b;
            let r2 = -pdot.0 + by * a - ay * b;
            (ax * r1 + ay * r2, bx * r1 + by * r2)
        }
    }
}

pub fn rhs(st: &VortexState, fields: &DynamicsFields, mode: Mode) -> Derivative {
    let pdot = vortex_velocity(st, fields);
    let (da, db) = eta_rate(st, pdot, fields.lattice(), mode);
    Derivative::new(pdot.0, pdot.1, da, db)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "robinPart")]
    pub robin_part: f64,
    #[serde(rename = "etaPart")]
    pub eta_part: f64,
}

pub fn hamiltonian(st: &VortexState, fields: &DynamicsFields) -> EnergyReport {
    let robin_part = 0.5 * fields.robin_at(&st.p);
    let eta_part = 0.5 * fields.periods.quadratic_form(st.eta);
    EnergyReport {
        h: robin_part + eta_part,
        robin_part,
        eta_part,
    }
}

/// `dH` at `st` applied to the tangent vector `w`.
pub fn hamiltonian_differential(st: &VortexState, w: &Derivative, fields: &DynamicsFields) -> f64 {
    let (rx, ry) = fields.robin_gradient_at(&st.p);
    let PeriodMatrices { p, q, r } = fields.periods;
    let HarmonicCoeffs { a, b } = st.eta;
    0.5 * (rx * w.dx + ry * w.dy) + (p * a + r * b) * w.da + (r * a + q * b) * w.db
}

/// `Omega = lambda^2 dx ^ dy - (dA - beta) ^ (dB + alpha)` on two tangent vectors.
pub fn symplectic_pairing(st: &VortexState, v1: &Derivative, v2: &Derivative, fields: &DynamicsFields) -> f64 {
    let (alpha, beta) = harmonic_basis(fields.lattice());
    let l2 = fields.lambda2_at(&st.p);
    let area = l2 * (v1.dx * v2.dy - v1.dy * v2.dx);
    let shifted_a = |v: &Derivative| v.da - beta.apply([v.dx, v.dy]);
    let shifted_b = |v: &Derivative| v.db + alpha.apply([v.dx, v.dy]);
    area - (shifted_a(v1) * shifted_b(v2) - shifted_a(v2) * shifted_b(v1))
}

/// Max-norm of the full-mode right-hand side.
pub fn equilibrium_residual(st: &VortexState, fields: &DynamicsFields) -> f64 {
    rhs(st, fields, Mode::Full).max_norm()
}

pub fn is_equilibrium(st: &VortexState, fields: &DynamicsFields) -> bool {
    equilibrium_residual(st, fields) < EQUILIBRIUM_TOL
}

fn rhs_array(lat: &LatticeBasis, z: [f64; 4], fields: &DynamicsFields, mode: Mode) -> [f64; 4] {
    rhs(&VortexState::from_array(lat, z), fields, mode).as_array()
}

fn axpy(z: [f64; 4], h: f64, k: [f64; 4]) -> [f64; 4] {
    [z[0] + h * k[0], z[1] + h * k[1], z[2] + h * k[2], z[3] + h * k[3]]
}

/// Classical four-stage Runge-Kutta step.
pub fn step_rk4(st: &VortexState, dt: f64, fields: &DynamicsFields, mode: Mode) -> VortexState {
    let lat = fields.lattice();
    let z = st.as_array();
    let k1 = rhs_array(lat, z, fields, mode);
    let k2 = rhs_array(lat, axpy(z, 0.5 * dt, k1), fields, mode);
    let k3 = rhs_array(lat, axpy(z, 0.5 * dt, k2), fields, mode);
    let k4 = rhs_array(lat, axpy(z, dt, k3), fields, mode);
    let mut out = z;
    for i in 0..4 {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    VortexState::from_array(lat, out)
}

/// Implicit midpoint step `z1 = z0 + dt f((z0 + z1)/2)` by fixed-point iteration.
pub fn step_implicit_midpoint(
    st: &VortexState,
    dt: f64,
    fields: &DynamicsFields,
    mode: Mode,
) -> Result<VortexState, DynamicsError> {
    let lat = fields.lattice();
    let z0 = st.as_array();
    let mut z1 = axpy(z0, dt, rhs_array(lat, z0, fields, mode));
    let mut update = f64::INFINITY;
    for _ in 0..MIDPOINT_MAX_ITER {
        let mid = [
            0.5 * (z0[0] + z1[0]),
            0.5 * (z0[1] + z1[1]),
            0.5 * (z0[2] + z1[2]),
            0.5 * (z0[3] + z1[3]),
        ];
        let next = axpy(z0, dt, rhs_array(lat, mid, fields, mode));
        update = (0..4).map(|i| (next[i] - z1[i]).abs()).fold(0.0, f64::max);
        z1 = next;
        if !update.is_finite() {
            return Err(DynamicsError::NonFinite);
        }
        if update < MIDPOINT_TOL {
            return Ok(VortexState::from_array(lat, z1));
        }
    }
    Err(DynamicsError::NoConvergence {
        iterations: MIDPOINT_MAX_ITER,
        update,
    })
}

pub fn step(st: &VortexState, config: &DynamicsConfig, fields: &DynamicsFields) -> Result<VortexState, DynamicsError> {
    match config.integrator {
        Integrator::Rk4 => Ok(step_rk4(st, config.dt, fields, config.mode)),
        Integrator::ImplicitMidpoint => step_implicit_midpoint(st, config.dt, fields, config.mode),
    }
}

/// Recorded samples of a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<VortexState>,
    pub energies: Vec<EnergyReport>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, t: f64, st: VortexState, fields: &DynamicsFields) {
        self.times.push(t);
        self.energies.push(hamiltonian(&st, fields));
        self.states.push(st);
    }

    /// `max |H(t) - H(0)|`.
    pub fn max_energy_drift(&self) -> f64 {
        let Some(first) = self.energies.first() else {
            return 0.0;
        };
        self.energies.iter().map(|e| (e.h - first.h).abs()).fold(0.0, f64::max)
    }

    pub fn last(&self) -> Option<&VortexState> {
        self.states.last()
    }
}

/// Fixed-step integration from `st0`, recording every `record_every` steps.
pub fn integrate(st0: &VortexState, config: &DynamicsConfig, fields: &DynamicsFields) -> Result<Trajectory, DynamicsError> {
    config.validate()?;
    let steps = config.steps();
    let mut traj = Trajectory::default();
    traj.push(0.0, *st0, fields);
    let mut st = *st0;
    for k in 1..=steps {
        st = step(&st, config, fields)?;
        if k % config.record_every == 0 {
            traj.push(k as f64 * config.dt, st, fields);
        }
    }
    Ok(traj)
}
