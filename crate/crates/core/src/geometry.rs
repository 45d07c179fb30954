//! Flat-torus lattice, harmonic one-form basis and the period (Gram) data.
//!
//! A genus-1 surface is represented by its flat model `R^2 / (aZ + bZ)` with
//! unit covolume. Constant one-forms on that model are exactly the harmonic
//! one-forms, and because the Hodge star on one-forms is conformally
//! invariant, nothing in this module depends on the conformal factor.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest determinant accepted before rescaling.
pub const MIN_DETERMINANT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate lattice: determinant {0} must be positive and above {MIN_DETERMINANT}")]
    DegenerateLattice(f64),
    #[error("non-finite lattice component")]
    NonFinite,
    #[error("a curve needs at least two points, got {0}")]
    EmptyCurve(usize),
}

/// Generators `a`, `b` of a unit-covolume torus lattice (`a_x b_y - a_y b_x = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeBasis {
    ax: f64,
    ay: f64,
    bx: f64,
    by: f64,
}

impl LatticeBasis {
    /// Builds a lattice, rescaling both generators uniformly by `det^(-1/2)`
    /// so the fundamental domain has area one.
    pub fn new(ax: f64, ay: f64, bx: f64, by: f64) -> Result<Self, GeometryError> {
        if ![ax, ay, bx, by].iter().all(|v| v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let det = ax * by - ay * bx;
        if det <= MIN_DETERMINANT {
            return Err(GeometryError::DegenerateLattice(det));
        }
        if det == 1.0 {
            return Ok(Self { ax, ay, bx, by });
        }
        let scale = det.sqrt().recip();
        Ok(Self {
            ax: ax * scale,
            ay: ay * scale,
            bx: bx * scale,
            by: by * scale,
        })
    }

    pub fn square() -> Self {
        Self {
            ax: 1.0,
            ay: 0.0,
            bx: 0.0,
            by: 1.0,
        }
    }

    pub fn a(&self) -> [f64; 2] {
        [self.ax, self.ay]
    }

    pub fn b(&self) -> [f64; 2] {
        [self.bx, self.by]
    }

    pub fn determinant(&self) -> f64 {
        self.ax * self.by - self.ay * self.bx
    }

    /// Surface volume; fixed to one by construction.
    pub fn volume(&self) -> f64 {
        1.0
    }

    /// Lattice coordinates `(s, t)` of a plane point, `x = s a + t b`.
    ///
    /// With unit determinant the inverse map is given by the dual basis
    /// `(b_y, -b_x)` and `(-a_y, a_x)`, i.e. by the forms alpha and beta.
    pub fn to_lattice(&self, x: f64, y: f64) -> (f64, f64) {
        (self.by * x - self.bx * y, -self.ay * x + self.ax * y)
    }

    pub fn to_plane(&self, s: f64, t: f64) -> (f64, f64) {
        (s * self.ax + t * self.bx, s * self.ay + t * self.by)
    }

    /// Dual basis vectors `a*`, `b*` with `a*.a = b*.b = 1`, `a*.b = b*.a = 0`.
    pub fn dual(&self) -> ([f64; 2], [f64; 2]) {
        ([self.by, -self.bx], [-self.ay, self.ax])
    }
}

impl Default for LatticeBasis {
    fn default() -> Self {
        Self::square()
    }
}

/// Canonical representative of a point on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    pub x: f64,
    pub y: f64,
    /// Lattice coordinates in `[0, 1)`.
    pub s: f64,
    pub t: f64,
}

impl TorusPoint {
    pub fn from_lattice(lat: &LatticeBasis, s: f64, t: f64) -> Self {
        let s = unit_fract(s);
        let t = unit_fract(t);
        let (x, y) = lat.to_plane(s, t);
        Self { x, y, s, t }
    }
}

fn unit_fract(v: f64) -> f64 {
    let f = v - v.floor();
    // v slightly below an integer can round up to exactly 1.0
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Reduces a plane point to its canonical representative. Idempotent.
pub fn wrap_point(lat: &LatticeBasis, x: f64, y: f64) -> TorusPoint {
    let (s, t) = lat.to_lattice(x, y);
    TorusPoint::from_lattice(lat, s, t)
}

/// Constant one-form `c_x dx + c_y dy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantOneForm {
    pub cx: f64,
    pub cy: f64,
}

impl ConstantOneForm {
    pub const fn new(cx: f64, cy: f64) -> Self {
        Self { cx, cy }
    }

    /// Value on a tangent vector.
    pub fn apply(&self, v: [f64; 2]) -> f64 {
        self.cx * v[0] + self.cy * v[1]
    }

    /// Coefficient of `dx ^ dy` in `self ^ other`.
    pub fn wedge(&self, other: &ConstantOneForm) -> f64 {
        self.cx * other.cy - self.cy * other.cx
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(k * self.cx, k * self.cy)
    }

    pub fn add(&self, other: &ConstantOneForm) -> Self {
        Self::new(self.cx + other.cx, self.cy + other.cy)
    }
}

/// The basis `(alpha, beta)` dual to the homology generators:
/// `alpha = b_y dx - b_x dy`, `beta = -a_y dx + a_x dy`.
pub fn harmonic_basis(lat: &LatticeBasis) -> (ConstantOneForm, ConstantOneForm) {
    let ([ax, ay], [bx, by]) = (lat.a(), lat.b());
    (ConstantOneForm::new(by, -bx), ConstantOneForm::new(-ay, ax))
}

/// Hodge star on one-forms: `*dx = dy`, `*dy = -dx`.
pub fn star_one_form(f: ConstantOneForm) -> ConstantOneForm {
    ConstantOneForm::new(-f.cy, f.cx)
}

/// Coefficients `(A, B)` of a harmonic form `A alpha + B beta`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HarmonicCoeffs {
    pub a: f64,
    pub b: f64,
}

impl HarmonicCoeffs {
    pub const ZERO: HarmonicCoeffs = HarmonicCoeffs { a: 0.0, b: 0.0 };

    pub const fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    pub fn to_form(&self, lat: &LatticeBasis) -> ConstantOneForm {
        let (alpha, beta) = harmonic_basis(lat);
        alpha.scale(self.a).add(&beta.scale(self.b))
    }

    pub fn norm(&self) -> f64 {
        self.a.hypot(self.b)
    }
}

/// Gram data of the harmonic basis under the star pairing (genus 1: scalars).
///
/// `p = int alpha ^ *alpha`, `q = int beta ^ *beta`, `r = int alpha ^ *beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodMatrices {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl PeriodMatrices {
    /// `p q - r^2`; one for a unit-volume lattice.
    pub fn determinant(&self) -> f64 {
        self.p * self.q - self.r * self.r
    }

    /// `int eta ^ *eta` for `eta = A alpha + B beta`.
    pub fn quadratic_form(&self, eta: HarmonicCoeffs) -> f64 {
        self.p * eta.a * eta.a + 2.0 * self.r * eta.a * eta.b + self.q * eta.b * eta.b
    }
}

pub fn period_matrices(lat: &LatticeBasis) -> PeriodMatrices {
    let ([ax, ay], [bx, by]) = (lat.a(), lat.b());
    PeriodMatrices {
        p: bx * bx + by * by,
        q: ax * ax + ay * ay,
        r: -(ax * bx + ay * by),
    }
}

/// Midpoint rule over an `n x n` subdivision of the fundamental domain in
/// lattice coordinates, for an integrand given as the `dx ^ dy` coefficient
/// at `(s, t)`. The parallelogram spanned by `a`, `b` is oriented
/// counterclockwise, so `ds ^ dt` pulls back to `det dx ^ dy`.
pub fn domain_quadrature(lat: &LatticeBasis, n: usize, integrand: impl Fn(f64, f64) -> f64) -> f64 {
    let n = n.max(1);
    let h = 1.0 / n as f64;
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            total += integrand((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
        }
    }
    total * h * h * lat.determinant()
}

/// Integral of `f ^ g` over the surface.
pub fn wedge_integral(f: ConstantOneForm, g: ConstantOneForm, lat: &LatticeBasis, n: usize) -> f64 {
    domain_quadrature(lat, n, |_, _| f.wedge(&g))
}

/// Period data by quadrature of the defining wedge integrals.
pub fn pqr_quadrature(lat: &LatticeBasis, n: usize) -> PeriodMatrices {
    pqr_quadrature_with_star(lat, n, star_one_form)
}

/// [`pqr_quadrature`] with a caller-supplied star; used by the verification
/// suite's negative control.
#[doc(hidden)]
pub fn pqr_quadrature_with_star(
    lat: &LatticeBasis,
    n: usize,
    star: impl Fn(ConstantOneForm) -> ConstantOneForm,
) -> PeriodMatrices {
    let (alpha, beta) = harmonic_basis(lat);
    PeriodMatrices {
        p: wedge_integral(alpha, star(alpha), lat, n),
        q: wedge_integral(beta, star(beta), lat, n),
        r: wedge_integral(alpha, star(beta), lat, n),
    }
}

/// Integral of a constant form along a polyline given by its lifted vertices.
pub fn line_integral(f: ConstantOneForm, curve: &[[f64; 2]]) -> Result<f64, GeometryError> {
    if curve.len() < 2 {
        return Err(GeometryError::EmptyCurve(curve.len()));
    }
    Ok(curve
        .windows(2)
        .map(|w| f.apply([w[1][0] - w[0][0], w[1][1] - w[0][1]]))
        .sum())
}

/// Homology generator `a` or `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    A,
    B,
}

/// Lift of the generator curve `tau -> tau * g` sampled at `n + 1` points,
/// starting from `origin`.
pub fn generator_curve(lat: &LatticeBasis, which: Generator, origin: [f64; 2], n: usize) -> Vec<[f64; 2]> {
    let g = match which {
        Generator::A => lat.a(),
        Generator::B => lat.b(),
    };
    let n = n.max(1);
    (0..=n)
        .map(|k| {
            let tau = k as f64 / n as f64;
            [origin[0] + tau * g[0], origin[1] + tau * g[1]]
        })
        .collect()
}

/// Reproducing kernel `B_qp = alpha_p beta_q - beta_p alpha_q` of the
/// harmonic one-forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BergmanKernel {
    pub alpha: ConstantOneForm,
    pub beta: ConstantOneForm,
}

/// `int_S basis_i ^ basis_j` for the basis ordered `(alpha, beta)`; these are
/// the intersection numbers, exact integers.
const BASIS_WEDGE: [[f64; 2]; 2] = [[0.0, 1.0], [-1.0, 0.0]];

impl BergmanKernel {
    pub fn new(lat: &LatticeBasis) -> Self {
        let (alpha, beta) = harmonic_basis(lat);
        Self { alpha, beta }
    }

    /// `int_q sigma_q ^ B_qp`, returned in `(alpha_p, beta_p)` coefficients.
    pub fn apply(&self, sigma: HarmonicCoeffs) -> HarmonicCoeffs {
        let c = [sigma.a, sigma.b];
        // int sigma ^ beta and int sigma ^ alpha
        let with_beta = c[0] * BASIS_WEDGE[0][1] + c[1] * BASIS_WEDGE[1][1];
        let with_alpha = c[0] * BASIS_WEDGE[0][0] + c[1] * BASIS_WEDGE[1][0];
        // sigma ^ (alpha_p beta_q - beta_p alpha_q) = alpha_p (sigma ^ beta) - beta_p (sigma ^ alpha)
        HarmonicCoeffs::new(with_beta, -with_alpha)
    }
}

pub fn bergman_apply(sigma: HarmonicCoeffs, lat: &LatticeBasis) -> HarmonicCoeffs {
    BergmanKernel::new(lat).apply(sigma)
}
