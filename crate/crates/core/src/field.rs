//! Spectral fields on the lattice grid: conformal factor, the auxiliary
//! potential, the Robin function and the metric Green's function.
//!
//! All differential operators act on the flat model. For a mode
//! `exp(2 pi i (k1 s + k2 t))` the flat gradient is `2 pi i (k1 a* + k2 b*)`
//! with the dual basis `a* = (b_y, -b_x)`, `b* = (-a_y, a_x)`. Nyquist bins
//! are projected out by every operator below; conformal specs are required
//! to stay strictly below them.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{LatticeBasis, TorusPoint};
use crate::spectral::{self, is_nyquist, wavenumber, Interpolant};

/// Mean tolerance for Poisson right-hand sides.
pub const ZERO_MEAN_TOL: f64 = 1e-10;

/// Points per ring used by [`robin_from_green`].
pub const RING_POINTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("grid size {0} must be a power of two and at least 8")]
    BadGridSize(usize),
    #[error("field is not strictly positive (minimum {0})")]
    NonPositiveField(f64),
    #[error("right-hand side has mean {0}, expected zero")]
    NonZeroMean(f64),
    #[error("conformal spec contains the constant mode (0, 0)")]
    ConstantMode,
    #[error("mode ({0}, {1}) is not resolved below the Nyquist frequency of the grid")]
    ModeNotResolved(i64, i64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("ring radius {radius} is inside two grid cells ({min})")]
    RadiusTooSmall { radius: f64, min: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
}

/// Sample grid of `n x m` nodes at lattice coordinates `(i/n, j/m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicGrid {
    lat: LatticeBasis,
    n: usize,
    m: usize,
}

impl PeriodicGrid {
    pub fn new(lat: LatticeBasis, n: usize, m: usize) -> Result<Self, FieldError> {
        for k in [n, m] {
            if k < 8 || !k.is_power_of_two() {
                return Err(FieldError::BadGridSize(k));
            }
        }
        Ok(Self { lat, n, m })
    }

    pub fn lattice(&self) -> &LatticeBasis {
        &self.lat
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.n * self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, i: usize, j: usize) -> TorusPoint {
        TorusPoint::from_lattice(&self.lat, i as f64 / self.n as f64, j as f64 / self.m as f64)
    }

    /// Largest physical spacing between neighbouring nodes along a generator.
    pub fn cell_size(&self) -> f64 {
        let [ax, ay] = self.lat.a();
        let [bx, by] = self.lat.b();
        (ax.hypot(ay) / self.n as f64).max(bx.hypot(by) / self.m as f64)
    }

    /// Flat wave vector `k1 a* + k2 b*` of bin `(i, j)`.
    fn wave_vector(&self, i: usize, j: usize) -> [f64; 2] {
        let (da, db) = self.lat.dual();
        let (k1, k2) = (wavenumber(i, self.n) as f64, wavenumber(j, self.m) as f64);
        [k1 * da[0] + k2 * db[0], k1 * da[1] + k2 * db[1]]
    }

    fn has_nyquist(&self, i: usize, j: usize) -> bool {
        is_nyquist(i, self.n) || is_nyquist(j, self.m)
    }
}

/// Real samples of a function on the torus.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: PeriodicGrid,
    values: Vec<f64>,
    interp: OnceLock<Interpolant>,
}

impl ScalarField {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self, FieldError> {
        assert_eq!(values.len(), grid.len(), "sample count must match the grid");
        if !values.iter().all(|v| v.is_finite()) {
            return Err(FieldError::NonFinite("scalar field"));
        }
        Ok(Self {
            grid,
            values,
            interp: OnceLock::new(),
        })
    }

    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64, f64) -> f64) -> Result<Self, FieldError> {
        let (n, m) = (grid.n, grid.m);
        let values = (0..n * m)
            .map(|k| f((k / m) as f64 / n as f64, (k % m) as f64 / m as f64))
            .collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self::new(grid, vec![0.0; grid.len()]).expect("zeros are finite")
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.m + j]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self, FieldError> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub(crate) fn interpolant(&self) -> &Interpolant {
        self.interp
            .get_or_init(|| Interpolant::from_values(&self.values, self.grid.n, self.grid.m))
    }

    pub(crate) fn coeffs(&self) -> Vec<Complex64> {
        spectral::forward(&self.values, self.grid.n, self.grid.m)
    }

    /// Value and flat gradient `(f, df/dx, df/dy)` of the trigonometric
    /// interpolant at `p`.
    pub fn value_and_gradient(&self, p: &TorusPoint) -> (f64, f64, f64) {
        let (f, fs, ft) = self.interpolant().eval_with_gradient(p.s, p.t);
        let (da, db) = self.grid.lat.dual();
        (f, fs * da[0] + ft * db[0], fs * da[1] + ft * db[1])
    }
}

/// Samples of a one-form `c_x dx + c_y dy`.
#[derive(Debug, Clone)]
pub struct CovectorField {
    pub cx: ScalarField,
    pub cy: ScalarField,
}

impl CovectorField {
    pub fn grid(&self) -> &PeriodicGrid {
        self.cx.grid()
    }

    pub fn at(&self, i: usize, j: usize) -> (f64, f64) {
        (self.cx.at(i, j), self.cy.at(i, j))
    }

    /// Pointwise Euclidean norm as a scalar field.
    pub fn magnitude(&self) -> ScalarField {
        let values = self
            .cx
            .values()
            .iter()
            .zip(self.cy.values())
            .map(|(a, b)| a.hypot(*b))
            .collect();
        ScalarField::new(*self.grid(), values).expect("finite inputs")
    }
}

/// One Fourier mode `cos_amp cos(2 pi (k1 s + k2 t)) + sin_amp sin(...)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConformalMode {
    pub k1: i64,
    pub k2: i64,
    #[serde(rename = "cos", default)]
    pub cos_amp: f64,
    #[serde(rename = "sin", default)]
    pub sin_amp: f64,
}

/// Conformal factor `lambda^2 = 1 + sum of modes`, before normalization.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConformalSpec {
    pub modes: Vec<ConformalMode>,
}

impl ConformalSpec {
    pub fn flat() -> Self {
        Self::default()
    }

    pub fn single(k1: i64, k2: i64, cos_amp: f64, sin_amp: f64) -> Self {
        Self {
            modes: vec![ConformalMode {
                k1,
                k2,
                cos_amp,
                sin_amp,
            }],
        }
    }

    pub fn is_flat(&self) -> bool {
        self.modes.iter().all(|m| m.cos_amp == 0.0 && m.sin_amp == 0.0)
    }

    pub fn validate(&self, grid: &PeriodicGrid) -> Result<(), FieldError> {
        for mode in &self.modes {
            if mode.k1 == 0 && mode.k2 == 0 {
                return Err(FieldError::ConstantMode);
            }
            if !mode.cos_amp.is_finite() || !mode.sin_amp.is_finite() {
                return Err(FieldError::NonFinite("conformal spec"));
            }
            if 2 * mode.k1.unsigned_abs() >= grid.n as u64 || 2 * mode.k2.unsigned_abs() >= grid.m as u64 {
                return Err(FieldError::ModeNotResolved(mode.k1, mode.k2));
            }
        }
        Ok(())
    }

    /// Unnormalized value at lattice coordinates.
    pub fn eval(&self, s: f64, t: f64) -> f64 {
        1.0 + self
            .modes
            .iter()
            .map(|m| {
                let (sn, cs) = (2.0 * PI * (m.k1 as f64 * s + m.k2 as f64 * t)).sin_cos();
                m.cos_amp * cs + m.sin_amp * sn
            })
            .sum::<f64>()
    }
}

/// Samples `lambda^2` and rescales it to unit mean (unit surface volume).
pub fn sample_conformal_factor(spec: &ConformalSpec, grid: &PeriodicGrid) -> Result<ScalarField, FieldError> {
    spec.validate(grid)?;
    let raw = ScalarField::from_fn(*grid, |s, t| spec.eval(s, t))?;
    let mean = raw.mean();
    if mean <= 0.0 {
        return Err(FieldError::NonPositiveField(raw.min()));
    }
    let field = raw.map(|v| v / mean)?;
    let min = field.min();
    if min <= 0.0 {
        return Err(FieldError::NonPositiveField(min));
    }
    Ok(field)
}

fn from_coeffs(grid: PeriodicGrid, coeffs: &[Complex64]) -> ScalarField {
    let values = spectral::inverse(coeffs, grid.n, grid.m);
    ScalarField::new(grid, values).expect("inverse transform of finite coefficients")
}

/// Zero-mean solution of the flat Poisson equation `lap phi = rhs`.
pub fn poisson_solve(rhs: &ScalarField) -> Result<ScalarField, FieldError> {
    let mean = rhs.mean();
    if mean.abs() > ZERO_MEAN_TOL {
        return Err(FieldError::NonZeroMean(mean));
    }
    let grid = *rhs.grid();
    let mut coeffs = rhs.coeffs();
    for i in 0..grid.n {
        for j in 0..grid.m {
            let c = &mut coeffs[i * grid.m + j];
            if (i == 0 && j == 0) || grid.has_nyquist(i, j) {
                *c = Complex64::new(0.0, 0.0);
                continue;
            }
            let [kx, ky] = grid.wave_vector(i, j);
            *c /= -4.0 * PI * PI * (kx * kx + ky * ky);
        }
    }
    Ok(from_coeffs(grid, &coeffs))
}

/// Spectral flat Laplacian.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let grid = *f.grid();
    let mut coeffs = f.coeffs();
    for i in 0..grid.n {
        for j in 0..grid.m {
            let c = &mut coeffs[i * grid.m + j];
            if grid.has_nyquist(i, j) {
                *c = Complex64::new(0.0, 0.0);
                continue;
            }
            let [kx, ky] = grid.wave_vector(i, j);
            *c *= -4.0 * PI * PI * (kx * kx + ky * ky);
        }
    }
    from_coeffs(grid, &coeffs)
}

/// Auxiliary potential `phi` with `lap phi = lambda^2 - 1`.
pub fn conformal_potential(lambda2: &ScalarField) -> Result<ScalarField, FieldError> {
    poisson_solve(&lambda2.map(|v| v - 1.0)?)
}

/// Robin function `(1/4 pi) log lambda^2 + 2 phi`, additive constant zero.
pub fn robin_field(lambda2: &ScalarField) -> Result<ScalarField, FieldError> {
    let min = lambda2.min();
    if min <= 0.0 {
        return Err(FieldError::NonPositiveField(min));
    }
    let phi = conformal_potential(lambda2)?;
    let values = lambda2
        .values()
        .iter()
        .zip(phi.values())
        .map(|(&l2, &ph)| l2.ln() / (4.0 * PI) + 2.0 * ph)
        .collect();
    ScalarField::new(*lambda2.grid(), values)
}

/// Flat differential `df` in `(dx, dy)` components.
pub fn differential(f: &ScalarField) -> CovectorField {
    let grid = *f.grid();
    let coeffs = f.coeffs();
    let mut ds = vec![Complex64::new(0.0, 0.0); coeffs.len()];
    let mut dt = ds.clone();
    for i in 0..grid.n {
        for j in 0..grid.m {
            let idx = i * grid.m + j;
            if !is_nyquist(i, grid.n) {
                ds[idx] = coeffs[idx] * Complex64::new(0.0, 2.0 * PI * wavenumber(i, grid.n) as f64);
            }
            if !is_nyquist(j, grid.m) {
                dt[idx] = coeffs[idx] * Complex64::new(0.0, 2.0 * PI * wavenumber(j, grid.m) as f64);
            }
        }
    }
    let ds = spectral::inverse(&ds, grid.n, grid.m);
    let dt = spectral::inverse(&dt, grid.n, grid.m);
    let (da, db) = grid.lat.dual();
    let cx = ds.iter().zip(&dt).map(|(s, t)| s * da[0] + t * db[0]).collect();
    let cy = ds.iter().zip(&dt).map(|(s, t)| s * da[1] + t * db[1]).collect();
    CovectorField {
        cx: ScalarField::new(grid, cx).expect("finite"),
        cy: ScalarField::new(grid, cy).expect("finite"),
    }
}

/// Trigonometric interpolation of a scalar field at `p`.
pub fn eval_field(f: &ScalarField, p: &TorusPoint) -> f64 {
    f.interpolant().eval(p.s, p.t)
}

pub fn eval_covector(c: &CovectorField, p: &TorusPoint) -> (f64, f64) {
    (eval_field(&c.cx, p), eval_field(&c.cy, p))
}

/// Metric Green's function `G(., p)` on the grid.
///
/// Solves `-lap_flat G = delta_p - lambda^2` with the delta truncated to the
/// resolved (non-Nyquist) modes, then fixes the constant so that the
/// discrete integral of `G lambda^2` vanishes.
pub fn greens_function(lambda2: &ScalarField, p: &TorusPoint) -> Result<ScalarField, FieldError> {
    let grid = *lambda2.grid();
    let l2 = lambda2.coeffs();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for i in 0..grid.n {
        for j in 0..grid.m {
            if (i == 0 && j == 0) || grid.has_nyquist(i, j) {
                continue;
            }
            let (k1, k2) = (wavenumber(i, grid.n) as f64, wavenumber(j, grid.m) as f64);
            let phase = -2.0 * PI * (k1 * p.s + k2 * p.t);
            let delta = Complex64::new(phase.cos(), phase.sin());
            let [kx, ky] = grid.wave_vector(i, j);
            coeffs[i * grid.m + j] = (delta - l2[i * grid.m + j]) / (4.0 * PI * PI * (kx * kx + ky * ky));
        }
    }
    let g = from_coeffs(grid, &coeffs);
    let weighted: f64 = g.values().iter().zip(lambda2.values()).map(|(a, b)| a * b).sum();
    let shift = -weighted / lambda2.values().iter().sum::<f64>();
    g.map(|v| v + shift)
}

/// Discrete `int G lambda^2 ds dt`.
pub fn weighted_integral(g: &ScalarField, lambda2: &ScalarField) -> f64 {
    g.values().iter().zip(lambda2.values()).map(|(a, b)| a * b).sum::<f64>() / g.grid().len() as f64
}

/// Robin value at `p` from the Green's function: ring averages of
/// `G(q, p) + (1/2 pi) log(lambda(p) |q - p|)` extrapolated to zero radius
/// in powers of `r^2`.
///
/// Agrees with [`robin_field`] up to one global constant.
pub fn robin_from_green(lambda2: &ScalarField, p: &TorusPoint, radii: &[f64]) -> Result<f64, FieldError> {
    let grid = *lambda2.grid();
    let min = 2.0 * grid.cell_size();
    if let Some(&radius) = radii.iter().find(|&&r| r.is_nan() || r < min) {
        return Err(FieldError::RadiusTooSmall { radius, min });
    }
    if radii.is_empty() {
        return Err(FieldError::RadiusTooSmall { radius: 0.0, min });
    }
    let g = greens_function(lambda2, p)?;
    let lambda_p = eval_field(lambda2, p).sqrt();
    let lat = grid.lattice();
    let samples: Vec<(f64, f64)> = radii
        .iter()
        .map(|&r| {
            let avg = (0..RING_POINTS)
                .map(|k| {
                    let theta = 2.0 * PI * k as f64 / RING_POINTS as f64;
                    let q = crate::geometry::wrap_point(lat, p.x + r * theta.cos(), p.y + r * theta.sin());
                    eval_field(&g, &q)
                })
                .sum::<f64>()
                / RING_POINTS as f64;
            (r * r, avg + (lambda_p * r).ln() / (2.0 * PI))
        })
        .collect();
    Ok(extrapolate_to_zero(&samples))
}

/// Neville evaluation at zero of the interpolating polynomial through `(x, y)`.
pub fn extrapolate_to_zero(points: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let mut table: Vec<f64> = points.iter().map(|p| p.1).collect();
    let n = table.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            table[i] = (xj * table[i] - xi * table[i + 1]) / (xj - xi);
        }
    }
    table[0]
}

/// Velocity one-form `-*dG + A alpha + B beta` of a vortex with background flow.
pub fn velocity_one_form(
    g: &ScalarField,
    eta: crate::geometry::HarmonicCoeffs,
    lat: &LatticeBasis,
) -> Result<CovectorField, FieldError> {
    if g.grid().lattice() != lat {
        return Err(FieldError::GridMismatch);
    }
    let dg = differential(g);
    let form = eta.to_form(lat);
    // -*(g_x dx + g_y dy) = g_y dx - g_x dy
    Ok(CovectorField {
        cx: dg.cy.map(|v| v + form.cx)?,
        cy: dg.cx.map(|v| -v + form.cy)?,
    })
}
