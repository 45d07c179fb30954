//! Invariant suite behind `verify`: geometry identities, field-solver
//! oracles, conservation on a canned non-flat scenario and the annulus checks.

use std::f64::consts::PI;

use serde::Serialize;
use torus_vortex::annulus::{self, AnnulusPoint, Boundary, CirculationPrescription, DEFAULT_IMAGES};
use torus_vortex::dynamics::{self, Derivative, DynamicsConfig, DynamicsFields, Mode, VortexState};
use torus_vortex::field::{self, ConformalSpec, PeriodicGrid, ScalarField};
use torus_vortex::geometry::{self, ConstantOneForm, Generator, HarmonicCoeffs, LatticeBasis, TorusPoint};

use crate::config::Scenario;
use crate::export::{TOOL_NAME, TOOL_VERSION};

/// How a check compares `value` against `target` and `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|value - target| <= tolerance`
    Within,
    /// `value > target`
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Check {
    pub fn within(name: &str, value: f64, target: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            target,
            tolerance,
            comparison: Comparison::Within,
            pass: (value - target).abs() <= tolerance,
        }
    }

    pub fn above(name: &str, value: f64, target: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            target,
            tolerance: 0.0,
            comparison: Comparison::Above,
            pass: value > target,
        }
    }
}

/// Diagnostic that is reported but never fails the run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Note {
    pub name: String,
    pub value: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub notes: Vec<Note>,
}

/// Deliberate defects for exercising the failure path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Hodge star with the opposite sign.
    StarSign,
}

fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Deterministic unit-area lattices covering a spread of shapes.
fn sample_lattices(count: usize) -> Vec<LatticeBasis> {
    (0..count)
        .map(|k| {
            let u = k as f64 + 1.0;
            let len = 0.4 + 1.8 * (0.5 + 0.5 * (1.3 * u).sin());
            let rot = 2.0 * PI * (0.618_033_988_75 * u).fract();
            let bx = 1.4 * (2.1 * u).cos();
            let by = 0.4 + 2.0 * (0.5 + 0.5 * (0.7 * u).cos());
            let (sn, cs) = rot.sin_cos();
            LatticeBasis::new(len * cs, len * sn, bx * cs - by * sn, bx * sn + by * cs).expect("positive determinant")
        })
        .collect()
}

fn geometry_checks(fault: Fault, checks: &mut Vec<Check>) {
    let star = move |f: ConstantOneForm| {
        let s = geometry::star_one_form(f);
        match fault {
            Fault::None => s,
            Fault::StarSign => s.scale(-1.0),
        }
    };
    let mut periods = 0.0f64;
    let mut wedge = 0.0f64;
    let mut pqr = 0.0f64;
    let mut det = 0.0f64;
    let mut bergman = 0.0f64;
    for (k, lat) in sample_lattices(100).iter().enumerate() {
        let (alpha, beta) = geometry::harmonic_basis(lat);
        let origin = [0.1 * k as f64, -0.05 * k as f64];
        let a = geometry::generator_curve(lat, Generator::A, origin, 16);
        let b = geometry::generator_curve(lat, Generator::B, origin, 16);
        let line = |f, c: &[[f64; 2]]| geometry::line_integral(f, c).expect("curve has points");
        periods = periods.max(max_abs([
            line(alpha, &a) - 1.0,
            line(alpha, &b),
            line(beta, &a),
            line(beta, &b) - 1.0,
        ]));
        wedge = wedge.max((geometry::wedge_integral(alpha, beta, lat, 8) - 1.0).abs());
        let closed = geometry::period_matrices(lat);
        let quad = geometry::pqr_quadrature_with_star(lat, 8, star);
        pqr = pqr.max(max_abs([closed.p - quad.p, closed.q - quad.q, closed.r - quad.r]));
        det = det.max((quad.p * quad.q - quad.r * quad.r - 1.0).abs());
        let sigma = HarmonicCoeffs::new(1.5 - 0.1 * k as f64, 0.3 * k as f64 - 2.0);
        let image = geometry::bergman_apply(sigma, lat);
        bergman = bergman.max(max_abs([image.a - sigma.a, image.b - sigma.b]));
    }
    checks.push(Check::within("geometry.periods", periods, 0.0, 1e-12));
    checks.push(Check::within("geometry.wedge_alpha_beta", wedge, 0.0, 1e-12));
    checks.push(Check::within("geometry.pqr_closed_vs_quadrature", pqr, 0.0, 1e-12));
    checks.push(Check::within("geometry.pq_minus_r_squared", det, 0.0, 1e-10));
    checks.push(Check::within("geometry.bergman_identity", bergman, 0.0, 0.0));
}

fn cosine_lambda2(grid: &PeriodicGrid) -> ScalarField {
    field::sample_conformal_factor(&ConformalSpec::single(1, 0, 0.5, 0.0), grid).expect("positive metric")
}

/// Green's function gauge and symmetry on a grid.
fn green_checks(prefix: &str, lambda2: &ScalarField, checks: &mut Vec<Check>) -> Result<(), field::FieldError> {
    let grid = *lambda2.grid();
    let (n, m) = (grid.n(), grid.m());
    let (i1, j1, i2, j2) = (n / 8, 5 * m / 16, 5 * n / 8, m / 32);
    let gp = field::greens_function(lambda2, &grid.node(i1, j1))?;
    let gq = field::greens_function(lambda2, &grid.node(i2, j2))?;
    let gauge = max_abs([field::weighted_integral(&gp, lambda2), field::weighted_integral(&gq, lambda2)]);
    checks.push(Check::within(&format!("{prefix}.green_gauge"), gauge, 0.0, 1e-10));
    checks.push(Check::within(&format!("{prefix}.green_symmetry"), (gp.at(i2, j2) - gq.at(i1, j1)).abs(), 0.0, 1e-10));
    Ok(())
}

fn field_checks(checks: &mut Vec<Check>) -> Result<(), field::FieldError> {
    let grid = PeriodicGrid::new(LatticeBasis::square(), 128, 128)?;
    let rhs = ScalarField::from_fn(grid, |s, _| 0.5 * (2.0 * PI * s).cos())?;
    let phi = field::poisson_solve(&rhs)?;
    let poisson = max_abs((0..grid.len()).map(|k| {
        let (i, j) = (k / grid.m(), k % grid.m());
        phi.at(i, j) + 0.5 * (2.0 * PI * i as f64 / grid.n() as f64).cos() / (4.0 * PI * PI)
    }));
    checks.push(Check::within("field.poisson_single_mode", poisson, 0.0, 1e-12));

    let sheared = PeriodicGrid::new(LatticeBasis::new(1.0, 0.2, 0.4, 1.1).expect("valid lattice"), 64, 64)?;
    let f = ScalarField::from_fn(sheared, |s, t| {
        (2.0 * PI * (s + 2.0 * t)).sin() + 0.3 * (2.0 * PI * (3.0 * s - t)).cos()
    })?;
    let df = field::differential(&f);
    let lat = *sheared.lattice();
    let fd_error = |h: f64| {
        max_abs((0..8).flat_map(|k| {
            let p = TorusPoint::from_lattice(&lat, 0.09 * k as f64 + 0.02, 0.13 * k as f64 + 0.31);
            let (gx, gy) = field::eval_covector(&df, &p);
            let ev = |dx: f64, dy: f64| field::eval_field(&f, &geometry::wrap_point(&lat, p.x + dx, p.y + dy));
            [
                gx - (ev(h, 0.0) - ev(-h, 0.0)) / (2.0 * h),
                gy - (ev(0.0, h) - ev(0.0, -h)) / (2.0 * h),
            ]
        }))
    };
    let errs = [fd_error(1e-2), fd_error(5e-3), fd_error(2.5e-3), fd_error(1.25e-3)];
    for (k, w) in errs.windows(2).enumerate() {
        checks.push(Check::within(&format!("field.gradient_fd_order_halving_{}", k + 1), w[0] / w[1], 4.0, 0.5));
    }

    let lambda2 = cosine_lambda2(&grid);
    green_checks("field", &lambda2, checks)?;

    let coarse = PeriodicGrid::new(LatticeBasis::square(), 64, 64)?;
    let l64 = cosine_lambda2(&coarse);
    let robin = field::robin_field(&l64)?;
    let points: Vec<TorusPoint> = [(0.05, 0.2), (0.3, 0.6), (0.55, 0.45), (0.8, 0.9)]
        .iter()
        .map(|&(s, t)| TorusPoint::from_lattice(coarse.lattice(), s, t))
        .collect();
    let radii = [0.08, 0.1, 0.12];
    let mut from_green = Vec::new();
    for p in &points {
        from_green.push(field::robin_from_green(&l64, p, &radii)?);
    }
    let direct: Vec<f64> = points.iter().map(|p| field::eval_field(&robin, p)).collect();
    let mismatch = max_abs((1..points.len()).map(|k| (from_green[k] - from_green[0]) - (direct[k] - direct[0])));
    checks.push(Check::within("field.robin_cross_validation", mismatch, 0.0, 1e-3));

    let flat = field::sample_conformal_factor(&ConformalSpec::flat(), &coarse)?;
    let flat_robin = field::robin_field(&flat)?;
    checks.push(Check::within("field.flat_robin_zero", max_abs(flat_robin.values().iter().copied()), 0.0, 1e-14));
    Ok(())
}

fn state(fields: &DynamicsFields, s: f64, t: f64, a: f64, b: f64) -> VortexState {
    VortexState {
        p: TorusPoint::from_lattice(fields.lattice(), s, t),
        eta: HarmonicCoeffs::new(a, b),
    }
}

fn dynamics_checks(checks: &mut Vec<Check>) -> Result<(), dynamics::DynamicsError> {
    let grid = PeriodicGrid::new(LatticeBasis::square(), 128, 128)?;
    let flat = DynamicsFields::build(&ConformalSpec::flat(), &grid)?;
    let cosine = DynamicsFields::build(&ConformalSpec::single(1, 0, 0.5, 0.0), &grid)?;

    let straight = dynamics::integrate(&state(&flat, 0.3, 0.7, 1.0, 0.0), &DynamicsConfig::default(), &flat)?;
    let gap = |u: f64, v: f64| {
        let d = (u - v).rem_euclid(1.0);
        d.min(1.0 - d)
    };
    let line_err = straight
        .times
        .iter()
        .zip(&straight.states)
        .map(|(t, st)| gap(st.p.s, 0.3 + t).max(gap(st.p.t, 0.7)))
        .fold(0.0, f64::max);
    checks.push(Check::within("dynamics.flat_straight_line", line_err, 0.0, 1e-10));

    let moving = state(&cosine, 0.1, 0.3, 2.0, 1.0);
    let drift = |dt: f64| -> Result<f64, dynamics::DynamicsError> {
        let cfg = DynamicsConfig { dt, ..Default::default() };
        Ok(dynamics::integrate(&moving, &cfg, &cosine)?.max_energy_drift())
    };
    let (coarse, fine) = (drift(1e-3)?, drift(5e-4)?);
    checks.push(Check::within("dynamics.energy_drift", coarse, 0.0, 1e-8));
    checks.push(Check::within("dynamics.energy_drift_halving_ratio", coarse / fine, 16.0, 4.0));

    let eq = max_abs((0..10).flat_map(|k| {
        let t = 0.1 * k as f64 + 0.013;
        [0.0, 0.5].map(|s| dynamics::equilibrium_residual(&state(&cosine, s, t, 0.0, 0.0), &cosine))
    }));
    checks.push(Check::within("dynamics.equilibrium_residual", eq, 0.0, 1e-9));
    let start = state(&cosine, 0.25, 0.0, 0.0, 0.0);
    checks.push(Check::above(
        "dynamics.moving_residual",
        dynamics::equilibrium_residual(&start, &cosine),
        1e-3,
    ));

    let (alpha, beta) = geometry::harmonic_basis(cosine.lattice());
    let d0 = dynamics::rhs(&start, &cosine, Mode::Full);
    let rate = max_abs([d0.da - beta.apply([d0.dx, d0.dy]), d0.db + alpha.apply([d0.dx, d0.dy])]);
    checks.push(Check::within("dynamics.eta_rate_identity", rate, 0.0, 1e-12));
    let one = DynamicsConfig { t_final: 1.0, ..Default::default() };
    let eta1 = dynamics::integrate(&start, &one, &cosine)?.last().map_or(0.0, |s| s.eta.norm());
    checks.push(Check::above("dynamics.eta_activation", eta1, 1e-4));
    let inc = DynamicsConfig { mode: Mode::Incomplete, ..Default::default() };
    let inc_traj = dynamics::integrate(&start, &inc, &cosine)?;
    let r0 = cosine.robin_at(&start.p);
    checks.push(Check::within(
        "dynamics.incomplete_eta_zero",
        max_abs(inc_traj.states.iter().map(|s| s.eta.norm())),
        0.0,
        0.0,
    ));
    checks.push(Check::within(
        "dynamics.incomplete_robin_constant",
        max_abs(inc_traj.states.iter().map(|s| cosine.robin_at(&s.p) - r0)),
        0.0,
        1e-8,
    ));

    let mut symplectic = 0.0f64;
    for k in 0..10 {
        let u = k as f64;
        let st = state(&cosine, (0.37 * u).fract(), (0.71 * u + 0.2).fract(), (1.3 * u).sin(), (0.9 * u).cos());
        let xh = dynamics::rhs(&st, &cosine, Mode::Full);
        for j in 0..100 {
            let v = (k * 100 + j) as f64;
            let w = Derivative::new((1.1 * v).sin(), (2.3 * v).cos(), (0.7 * v).sin(), (1.9 * v).cos());
            let lhs = dynamics::symplectic_pairing(&st, &xh, &w, &cosine);
            symplectic = symplectic.max((lhs - dynamics::hamiltonian_differential(&st, &w, &cosine)).abs());
        }
    }
    checks.push(Check::within("dynamics.symplectic_consistency", symplectic, 0.0, 1e-8));
    Ok(())
}

fn annulus_checks(checks: &mut Vec<Check>, notes: &mut Vec<Note>) -> Result<(), annulus::AnnulusError> {
    let points: Vec<AnnulusPoint> = (0..6)
        .map(|k| AnnulusPoint::new(1.2 + 0.12 * k as f64, 0.5 * k as f64))
        .collect::<Result<_, _>>()?;
    checks.push(Check::within(
        "annulus.boundary_residual",
        points.iter().map(|p| annulus::boundary_residual(p, DEFAULT_IMAGES, 64)).fold(0.0, f64::max),
        0.0,
        1e-6,
    ));

    let mut harmonic = 0.0f64;
    let mut partition = 0.0f64;
    let mut reciprocal = 0.0f64;
    for r in [1.15, 1.5, 1.85] {
        for j in [Boundary::Inner, Boundary::Outer] {
            let lap = annulus::polar_laplacian(
                |r, th| annulus::harmonic_measure(j, &AnnulusPoint::new(r, th).expect("inside annulus")),
                r,
                0.4,
                1e-3,
            );
            harmonic = harmonic.max(lap.abs());
        }
        let p = AnnulusPoint::new(r, 0.4)?;
        partition = partition
            .max((annulus::harmonic_measure(Boundary::Inner, &p) + annulus::harmonic_measure(Boundary::Outer, &p) - 1.0).abs());
        let lap = annulus::polar_laplacian(|r, _| annulus::reciprocal_boundary_interpolant(r), r, 0.4, 1e-3);
        reciprocal = reciprocal.max(lap.abs());
    }
    checks.push(Check::within("annulus.harmonic_measure_harmonic", harmonic, 0.0, 1e-6));
    checks.push(Check::within("annulus.harmonic_measure_partition", partition, 0.0, 1e-15));
    notes.push(Note {
        name: "annulus.reciprocal_boundary_form_harmonicity".to_string(),
        value: reciprocal,
        message: "the boundary interpolant 2/r - 1 matches the boundary values but is not harmonic; \
                  the logarithmic harmonic measure is used instead"
            .to_string(),
    });

    let pres = CirculationPrescription::default();
    let mut inner = Vec::new();
    let mut outer = Vec::new();
    let mut plain = Vec::new();
    for p in &points {
        let g = |x: [f64; 2]| {
            let q = AnnulusPoint::from_xy(x[0], x[1]).expect("ring inside annulus");
            annulus::hydrodynamic_green(&q, p, &pres, DEFAULT_IMAGES).expect("distinct points")
        };
        let f = |x: [f64; 2]| {
            let q = AnnulusPoint::from_xy(x[0], x[1]).expect("ring inside annulus");
            annulus::annulus_green_f(&q, p, DEFAULT_IMAGES).expect("distinct points")
        };
        inner.push(annulus::circulation(g, Boundary::Inner, p, 512));
        outer.push(annulus::circulation(g, Boundary::Outer, p, 512));
        plain.push(annulus::circulation(f, Boundary::Inner, p, 512));
    }
    checks.push(Check::within("annulus.circulation_inner", max_abs(inner.iter().map(|c| c - pres.c1())), 0.0, 1e-4));
    checks.push(Check::within("annulus.circulation_outer", max_abs(outer.iter().map(|c| c - pres.c2())), 0.0, 1e-4));
    let spread = |v: &[f64]| max_abs(v.iter().map(|c| c - v[0]));
    checks.push(Check::within(
        "annulus.circulation_constant_along_path",
        spread(&inner).max(spread(&outer)),
        0.0,
        1e-4,
    ));
    checks.push(Check::above("annulus.plain_green_circulation_varies", spread(&plain), 1e-2));
    let rejected = CirculationPrescription::new(0.5, 0.7).is_err();
    checks.push(Check::within("annulus.stokes_violation_rejected", f64::from(u8::from(rejected)), 1.0, 0.0));
    Ok(())
}

/// Checks on a user scenario: metric positivity, gauge/symmetry and a short
/// conservation run with the configured integrator.
fn scenario_checks(scenario: &Scenario, checks: &mut Vec<Check>) -> Result<(), String> {
    let fields = scenario.build_fields().map_err(|e| e.to_string())?;
    checks.push(Check::above("scenario.lambda2_min", fields.lambda2().min(), 0.0));
    green_checks("scenario", fields.lambda2(), checks).map_err(|e| e.to_string())?;
    let cfg = scenario.dynamics();
    let traj = dynamics::integrate(&scenario.initial, &cfg, &fields).map_err(|e| e.to_string())?;
    checks.push(Check::within("scenario.energy_drift", traj.max_energy_drift(), 0.0, 1e-8));
    Ok(())
}

/// Runs the whole suite. Errors are for failures to evaluate a check, not
/// for checks that evaluate and fail.
pub fn run(scenario: Option<&Scenario>, fault: Fault) -> Result<Report, String> {
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    geometry_checks(fault, &mut checks);
    field_checks(&mut checks).map_err(|e| e.to_string())?;
    dynamics_checks(&mut checks).map_err(|e| e.to_string())?;
    annulus_checks(&mut checks, &mut notes).map_err(|e| e.to_string())?;
    if let Some(sc) = scenario {
        scenario_checks(sc, &mut checks)?;
    }
    Ok(Report {
        tool: TOOL_NAME.to_string(),
        version: TOOL_VERSION.to_string(),
        passed: checks.iter().all(|c| c.pass),
        checks,
        notes,
    })
}
