//! Genus-zero check: the annulus `1 < |z| < 2`.
//!
//! The Dirichlet Green's function is built from image charges. Reflection in
//! `|z| = 1` is `z -> 1/conj(z)` and in `|z| = 2` is `z -> 4/conj(z)`; their
//! composition scales by 4, so the images of `p` are `4^k p` (positive) and
//! `4^k / conj(p)` (negative). Harmonic functions of `|z|` then correct the
//! boundary values and the boundary circulations.

use num_complex::Complex64;
use std::f64::consts::{LN_2, PI};
use thiserror::Error;

pub const INNER_RADIUS: f64 = 1.0;
pub const OUTER_RADIUS: f64 = 2.0;

/// Default number of image generations on each side.
pub const DEFAULT_IMAGES: usize = 20;

/// Allowed violation of `c1 + c2 = 1`.
pub const STOKES_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnnulusError {
    #[error("radius {0} is outside the open annulus (1, 2)")]
    OutsideAnnulus(f64),
    #[error("source and field points coincide")]
    CoincidentPoints,
    #[error("circulations must sum to one, got {0}")]
    StokesViolation(f64),
    #[error("boundary index {0} must be 1 or 2")]
    BadBoundary(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// `|z| = 1`
    Inner,
    /// `|z| = 2`
    Outer,
}

impl Boundary {
    pub fn from_index(j: u8) -> Result<Self, AnnulusError> {
        match j {
            1 => Ok(Boundary::Inner),
            2 => Ok(Boundary::Outer),
            _ => Err(AnnulusError::BadBoundary(j)),
        }
    }

    pub fn radius(self) -> f64 {
        match self {
            Boundary::Inner => INNER_RADIUS,
            Boundary::Outer => OUTER_RADIUS,
        }
    }
}

/// Interior point in polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusPoint {
    r: f64,
    theta: f64,
}

impl AnnulusPoint {
    pub fn new(r: f64, theta: f64) -> Result<Self, AnnulusError> {
        if !(r > INNER_RADIUS && r < OUTER_RADIUS) {
            return Err(AnnulusError::OutsideAnnulus(r));
        }
        Ok(Self {
            r,
            theta: theta.rem_euclid(2.0 * PI),
        })
    }

    pub fn from_xy(x: f64, y: f64) -> Result<Self, AnnulusError> {
        Self::new(x.hypot(y), y.atan2(x))
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(self.r, self.theta)
    }

    pub fn xy(&self) -> [f64; 2] {
        let z = self.to_complex();
        [z.re, z.im]
    }
}

/// Harmonic measure of boundary `j`: `omega_1 = log(2/|p|) / log 2`,
/// `omega_2 = 1 - omega_1`.
pub fn harmonic_measure(j: Boundary, p: &AnnulusPoint) -> f64 {
    measure_at_radius(j, p.r)
}

fn measure_at_radius(j: Boundary, r: f64) -> f64 {
    let inner = (OUTER_RADIUS / r).ln() / LN_2;
    match j {
        Boundary::Inner => inner,
        Boundary::Outer => 1.0 - inner,
    }
}

/// `2/|p| - 1`: matches the boundary data of `omega_1` but is not harmonic
/// in the plane. Only used to report that discrepancy.
pub fn reciprocal_boundary_interpolant(r: f64) -> f64 {
    2.0 / r - 1.0
}

/// Dirichlet Green's function `F(q, p)` with `-lap F = delta_p`, truncated to
/// `images` image generations on each side.
pub fn annulus_green_f(q: &AnnulusPoint, p: &AnnulusPoint, images: usize) -> Result<f64, AnnulusError> {
    green_f_complex(q.to_complex(), p.to_complex(), images)
}

/// Same as [`annulus_green_f`] for any `q` in the closed annulus.
pub fn green_f_complex(q: Complex64, p: Complex64, images: usize) -> Result<f64, AnnulusError> {
    if (q - p).norm() < 1e-12 {
        return Err(AnnulusError::CoincidentPoints);
    }
    let pc = p.conj();
    let one = Complex64::new(1.0, 0.0);
    // generation 0: the source and its reflection in the unit circle
    let mut u = (q - p).norm().ln() - (q - one / pc).norm().ln();
    let mut scale = 1.0;
    for _ in 1..=images {
        scale *= 4.0;
        // 4^k p and 4^k / conj(p), renormalized by their (divergent) moduli
        u += (one - q / (p * scale)).norm().ln() - (one - q * pc / scale).norm().ln();
        // 4^-k p and 4^-k / conj(p)
        u += (one - p / (q * scale)).norm().ln() - (one - one / (pc * q * scale)).norm().ln();
    }
    // the image sum equals log|p| on |q| = 1 and 0 on |q| = 2
    let correction = p.norm().ln() * measure_at_radius(Boundary::Inner, q.norm());
    Ok(-(u - correction) / (2.0 * PI))
}

/// Largest `|F|` over `samples` points on each boundary circle.
pub fn boundary_residual(p: &AnnulusPoint, images: usize, samples: usize) -> f64 {
    let pz = p.to_complex();
    let mut worst = 0.0f64;
    for radius in [INNER_RADIUS, OUTER_RADIUS] {
        for k in 0..samples {
            let q = Complex64::from_polar(radius, 2.0 * PI * k as f64 / samples as f64);
            let f = green_f_complex(q, pz, images).expect("boundary points are away from interior sources");
            worst = worst.max(f.abs());
        }
    }
    worst
}

/// Prescribed circulations on `|z| = 1` and `|z| = 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirculationPrescription {
    c1: f64,
    c2: f64,
}

impl CirculationPrescription {
    pub fn new(c1: f64, c2: f64) -> Result<Self, AnnulusError> {
        let sum = c1 + c2;
        if (sum - 1.0).abs().is_nan() || (sum - 1.0).abs() > STOKES_TOL {
            return Err(AnnulusError::StokesViolation(sum));
        }
        Ok(Self { c1, c2 })
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }
}

impl Default for CirculationPrescription {
    /// Zero circulation around the hole.
    fn default() -> Self {
        Self { c1: 0.0, c2: 1.0 }
    }
}

/// Coefficient that makes `kappa * omega_1(p) * omega_1(q)` cancel the
/// inner-boundary circulation `omega_1(p)` of `F`: the velocity form
/// `-*d omega_1 = d theta / log 2` circulates `-2 pi / log 2` around the
/// clockwise-oriented inner circle.
pub const MEASURE_COUPLING: f64 = LN_2 / (2.0 * PI);

/// Hydrodynamic Green's function
/// `F(q, p) + kappa (omega_1(p) omega_1(q) - c1 (omega_1(p) + omega_1(q)))`.
///
/// Only the `q`-dependence matters for the flow; the `-c1 omega_1(p)` term
/// keeps the function symmetric.
pub fn hydrodynamic_green(
    q: &AnnulusPoint,
    p: &AnnulusPoint,
    prescription: &CirculationPrescription,
    images: usize,
) -> Result<f64, AnnulusError> {
    let f = annulus_green_f(q, p, images)?;
    let (wq, wp) = (
        harmonic_measure(Boundary::Inner, q),
        harmonic_measure(Boundary::Inner, p),
    );
    Ok(f + MEASURE_COUPLING * (wp * wq - prescription.c1 * (wp + wq)))
}

/// Circulation of `-*dG` around boundary `j` (annulus on the left), for
/// `g(q) = G(q, p)` given on Cartesian points.
///
/// The integral runs over a circle strictly between the boundary and `p`;
/// the form is closed away from `p`, so the value is that of the boundary.
/// The radial derivative uses centered differences and the angular
/// quadrature is the trapezoid rule on `n` points.
pub fn circulation(g: impl Fn([f64; 2]) -> f64, j: Boundary, p: &AnnulusPoint, n: usize) -> f64 {
    let (radius, orientation) = match j {
        Boundary::Inner => (INNER_RADIUS + (0.5 * (p.r - INNER_RADIUS)).min(0.05), -1.0),
        Boundary::Outer => (OUTER_RADIUS - (0.5 * (OUTER_RADIUS - p.r)).min(0.05), 1.0),
    };
    let h = (1e-5f64).min(0.25 * (radius - INNER_RADIUS).min(OUTER_RADIUS - radius));
    let dtheta = 2.0 * PI / n as f64;
    let sum: f64 = (0..n)
        .map(|k| {
            let (sn, cs) = (k as f64 * dtheta).sin_cos();
            let plus = g([(radius + h) * cs, (radius + h) * sn]);
            let minus = g([(radius - h) * cs, (radius - h) * sn]);
            (plus - minus) / (2.0 * h) * radius
        })
        .sum();
    // tangential part of -*dG along a counterclockwise circle is -dG/dr
    -orientation * sum * dtheta
}

/// Five-point Laplacian in polar coordinates with step `h` in both `r` and `theta`.
pub fn polar_laplacian(f: impl Fn(f64, f64) -> f64, r: f64, theta: f64, h: f64) -> f64 {
    let c = f(r, theta);
    let (rp, rm) = (f(r + h, theta), f(r - h, theta));
    let (tp, tm) = (f(r, theta + h), f(r, theta - h));
    (rp - 2.0 * c + rm) / (h * h) + (rp - rm) / (2.0 * h * r) + (tp - 2.0 * c + tm) / (h * h * r * r)
}
