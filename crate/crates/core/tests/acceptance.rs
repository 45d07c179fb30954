//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line per
//! criterion and then asserts it.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand::rngs::StdRng;

use torus_vortex::annulus::{self, AnnulusPoint, Boundary, CirculationPrescription, DEFAULT_IMAGES};
use torus_vortex::dynamics::{self, Derivative, DynamicsConfig, DynamicsFields, Mode, VortexState};
use torus_vortex::field::{self, ConformalSpec, PeriodicGrid, ScalarField};
use torus_vortex::geometry::{self, Generator, HarmonicCoeffs, LatticeBasis, TorusPoint};

fn report(id: u32, name: &str, pass: bool, detail: String) {
    println!("[{}] criterion {id:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn cosine_fields(n: usize) -> DynamicsFields {
    let grid = PeriodicGrid::new(LatticeBasis::square(), n, n).unwrap();
    DynamicsFields::build(&ConformalSpec::single(1, 0, 0.5, 0.0), &grid).unwrap()
}

fn flat_fields(n: usize) -> DynamicsFields {
    let grid = PeriodicGrid::new(LatticeBasis::square(), n, n).unwrap();
    DynamicsFields::build(&ConformalSpec::flat(), &grid).unwrap()
}

fn at(fields: &DynamicsFields, s: f64, t: f64, a: f64, b: f64) -> VortexState {
    VortexState {
        p: TorusPoint::from_lattice(fields.lattice(), s, t),
        eta: HarmonicCoeffs::new(a, b),
    }
}

/// Distance between lattice coordinates modulo integers.
fn periodic_gap(u: f64, v: f64) -> f64 {
    let d = (u - v).rem_euclid(1.0);
    d.min(1.0 - d)
}

fn random_unit_lattice(rng: &mut StdRng) -> LatticeBasis {
    let len = rng.random_range(0.3..2.5);
    let rot = rng.random_range(0.0..2.0 * PI);
    let (bx, by) = (rng.random_range(-1.5..1.5), rng.random_range(0.3..2.5));
    let (sn, cs) = rot.sin_cos();
    LatticeBasis::new(len * cs, len * sn, bx * cs - by * sn, bx * sn + by * cs).unwrap()
}

#[test]
fn criterion_01_flat_torus_straight_lines() {
    let start = Instant::now();
    let fields = flat_fields(128);
    let st0 = at(&fields, 0.3, 0.7, 1.0, 0.0);
    let cfg = DynamicsConfig { dt: 1e-3, t_final: 10.0, ..Default::default() };
    let traj = dynamics::integrate(&st0, &cfg, &fields).unwrap();
    let mut pos_err = 0.0f64;
    let mut eta_err = 0.0f64;
    for (t, st) in traj.times.iter().zip(&traj.states) {
        pos_err = pos_err.max(periodic_gap(st.p.s, 0.3 + t)).max(periodic_gap(st.p.t, 0.7));
        eta_err = eta_err.max((st.eta.a - 1.0).abs()).max(st.eta.b.abs());
    }
    let elapsed = start.elapsed();
    report(
        1,
        "flat torus straight lines",
        pos_err < 1e-10 && eta_err < 1e-14 && elapsed < Duration::from_secs(5),
        format!("max position error {pos_err:.2e} (< 1e-10), eta drift {eta_err:.2e} (< 1e-14), {elapsed:.2?} (< 5s)"),
    );
}

#[test]
fn criterion_02_hamiltonian_first_integral() {
    let start = Instant::now();
    let fields = cosine_fields(128);
    // a moving initial state, so the truncation error is above rounding
    let st0 = at(&fields, 0.1, 0.3, 2.0, 1.0);
    let drift = |dt: f64| {
        let cfg = DynamicsConfig { dt, t_final: 10.0, ..Default::default() };
        dynamics::integrate(&st0, &cfg, &fields).unwrap().max_energy_drift()
    };
    let coarse = drift(1e-3);
    let fine = drift(5e-4);
    let ratio = coarse / fine;
    let elapsed = start.elapsed();
    report(
        2,
        "Hamiltonian first integral",
        coarse <= 1e-8 && (12.0..=20.0).contains(&ratio) && elapsed < Duration::from_secs(30),
        format!("drift {coarse:.3e} (<= 1e-8), halving ratio {ratio:.2} (in [12, 20]), {elapsed:.2?} (< 30s)"),
    );
}

#[test]
fn criterion_03_equilibria_at_robin_critical_points() {
    let fields = cosine_fields(128);
    let mut worst = 0.0f64;
    for k in 0..10 {
        let t = k as f64 / 10.0 + 0.013;
        for s in [0.0, 0.5] {
            worst = worst.max(dynamics::equilibrium_residual(&at(&fields, s, t, 0.0, 0.0), &fields));
        }
    }
    let moving = dynamics::equilibrium_residual(&at(&fields, 0.25, 0.4, 0.0, 0.0), &fields);
    report(
        3,
        "equilibria where dR = 0",
        worst < 1e-9 && moving > 1e-3,
        format!("max residual at s in {{0, 1/2}} {worst:.2e} (< 1e-9), residual at s = 1/4 {moving:.3e} (> 1e-3)"),
    );
}

#[test]
fn criterion_04_topological_correction_is_active() {
    let fields = cosine_fields(128);
    let lat = *fields.lattice();
    let (alpha, beta) = geometry::harmonic_basis(&lat);
    let st0 = at(&fields, 0.25, 0.0, 0.0, 0.0);
    let d0 = dynamics::rhs(&st0, &fields, Mode::Full);
    let rate_err = (d0.da - beta.apply([d0.dx, d0.dy]))
        .abs()
        .max((d0.db + alpha.apply([d0.dx, d0.dy])).abs());

    let one = DynamicsConfig { t_final: 1.0, ..Default::default() };
    let full = dynamics::integrate(&st0, &one, &fields).unwrap();
    let eta_at_one = full.last().unwrap().eta.norm();

    let inc_cfg = DynamicsConfig { mode: Mode::Incomplete, t_final: 10.0, ..Default::default() };
    let inc = dynamics::integrate(&st0, &inc_cfg, &fields).unwrap();
    let eta_inc = inc.states.iter().map(|s| s.eta.norm()).fold(0.0, f64::max);
    let r0 = fields.robin_at(&st0.p);
    let r_drift = inc.states.iter().map(|s| (fields.robin_at(&s.p) - r0).abs()).fold(0.0, f64::max);
    report(
        4,
        "topological correction activity",
        rate_err < 1e-12 && eta_at_one > 1e-4 && eta_inc == 0.0 && r_drift < 1e-8,
        format!(
            "|(A',B') - (beta(p'), -alpha(p'))| {rate_err:.2e} (< 1e-12), |eta(1)| {eta_at_one:.3e} (> 1e-4), \
             incomplete max|eta| {eta_inc:.1e} (= 0), R drift {r_drift:.2e} (< 1e-8)"
        ),
    );
}

#[test]
fn criterion_05_geometry_identities() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(5);
    let mut period_err = 0.0f64;
    let mut wedge_err = 0.0f64;
    let mut pqr_err = 0.0f64;
    let mut det_err = 0.0f64;
    let mut bergman_exact = true;
    for _ in 0..100 {
        let lat = random_unit_lattice(&mut rng);
        let (alpha, beta) = geometry::harmonic_basis(&lat);
        let origin = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let a_curve = geometry::generator_curve(&lat, Generator::A, origin, 32);
        let b_curve = geometry::generator_curve(&lat, Generator::B, origin, 32);
        let periods = [
            (geometry::line_integral(alpha, &a_curve).unwrap(), 1.0),
            (geometry::line_integral(alpha, &b_curve).unwrap(), 0.0),
            (geometry::line_integral(beta, &a_curve).unwrap(), 0.0),
            (geometry::line_integral(beta, &b_curve).unwrap(), 1.0),
        ];
        for (got, want) in periods {
            period_err = period_err.max((got - want).abs());
        }
        wedge_err = wedge_err.max((geometry::wedge_integral(alpha, beta, &lat, 8) - 1.0).abs());
        let closed = geometry::period_matrices(&lat);
        let quad = geometry::pqr_quadrature(&lat, 8);
        pqr_err = pqr_err
            .max((closed.p - quad.p).abs())
            .max((closed.q - quad.q).abs())
            .max((closed.r - quad.r).abs());
        det_err = det_err.max((closed.determinant() - 1.0).abs());
        let sigma = HarmonicCoeffs::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        bergman_exact &= geometry::bergman_apply(sigma, &lat) == sigma;
    }
    let elapsed = start.elapsed();
    report(
        5,
        "geometry identities",
        period_err < 1e-12
            && wedge_err < 1e-12
            && pqr_err < 1e-12
            && det_err < 1e-10
            && bergman_exact
            && elapsed < Duration::from_secs(2),
        format!(
            "periods {period_err:.1e}, int alpha^beta {wedge_err:.1e}, PQR {pqr_err:.1e} (< 1e-12); \
             PQ - R^2 {det_err:.1e} (< 1e-10); Bergman exact {bergman_exact}; {elapsed:.2?} (< 2s)"
        ),
    );
}

#[test]
fn criterion_06_field_solver_oracles() {
    let grid = PeriodicGrid::new(LatticeBasis::square(), 128, 128).unwrap();
    let rhs = ScalarField::from_fn(grid, |s, _| 0.5 * (2.0 * PI * s).cos()).unwrap();
    let phi = field::poisson_solve(&rhs).unwrap();
    let mut poisson_err = 0.0f64;
    for i in 0..128 {
        for j in (0..128).step_by(17) {
            let exact = -0.5 * (2.0 * PI * i as f64 / 128.0).cos() / (4.0 * PI * PI);
            poisson_err = poisson_err.max((phi.at(i, j) - exact).abs());
        }
    }

    // spectral gradient against centered differences of the interpolant
    let sheared = PeriodicGrid::new(LatticeBasis::new(1.0, 0.2, 0.4, 1.1).unwrap(), 64, 64).unwrap();
    let f = ScalarField::from_fn(sheared, |s, t| {
        (2.0 * PI * (s + 2.0 * t)).sin() + 0.3 * (2.0 * PI * (3.0 * s - t)).cos() + 0.1 * (2.0 * PI * 2.0 * t).sin()
    })
    .unwrap();
    let df = field::differential(&f);
    let lat = *sheared.lattice();
    let probes: Vec<TorusPoint> = (0..12)
        .map(|k| TorusPoint::from_lattice(&lat, 0.071 * k as f64 + 0.013, 0.117 * k as f64 + 0.29))
        .collect();
    let fd_error = |h: f64| {
        probes
            .iter()
            .map(|p| {
                let (gx, gy) = field::eval_covector(&df, p);
                let ev = |dx: f64, dy: f64| field::eval_field(&f, &geometry::wrap_point(&lat, p.x + dx, p.y + dy));
                let fx = (ev(h, 0.0) - ev(-h, 0.0)) / (2.0 * h);
                let fy = (ev(0.0, h) - ev(0.0, -h)) / (2.0 * h);
                (gx - fx).abs().max((gy - fy).abs())
            })
            .fold(0.0, f64::max)
    };
    let errs: Vec<f64> = [1e-2, 5e-3, 2.5e-3, 1.25e-3].iter().map(|&h| fd_error(h)).collect();
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    let second_order = ratios.iter().all(|r| (3.5..=4.5).contains(r));

    let l2 = field::sample_conformal_factor(&ConformalSpec::single(1, 0, 0.5, 0.0), &grid).unwrap();
    let p = grid.node(10, 40);
    let q = grid.node(77, 3);
    let gp = field::greens_function(&l2, &p).unwrap();
    let gq = field::greens_function(&l2, &q).unwrap();
    let gauge = field::weighted_integral(&gp, &l2).abs().max(field::weighted_integral(&gq, &l2).abs());
    let symmetry = (gp.at(77, 3) - gq.at(10, 40)).abs();

    report(
        6,
        "field-solver oracles",
        poisson_err < 1e-12 && second_order && gauge < 1e-10 && symmetry < 1e-10,
        format!(
            "Poisson error {poisson_err:.1e} (< 1e-12); FD error ratios {:?} (each in [3.5, 4.5]); \
             gauge {gauge:.1e}, symmetry {symmetry:.1e} (< 1e-10)",
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_07_robin_cross_validation() {
    let start = Instant::now();
    let grid = PeriodicGrid::new(LatticeBasis::square(), 256, 256).unwrap();
    let l2 = field::sample_conformal_factor(&ConformalSpec::single(1, 0, 0.5, 0.0), &grid).unwrap();
    let robin = field::robin_field(&l2).unwrap();
    let lat = *grid.lattice();
    let radii = [0.02, 0.03, 0.04];
    let points: Vec<TorusPoint> = [(0.05, 0.2), (0.25, 0.7), (0.5, 0.5), (0.63, 0.11), (0.87, 0.93)]
        .iter()
        .map(|&(s, t)| TorusPoint::from_lattice(&lat, s, t))
        .collect();
    let from_green: Vec<f64> = points.iter().map(|p| field::robin_from_green(&l2, p, &radii).unwrap()).collect();
    let direct: Vec<f64> = points.iter().map(|p| field::eval_field(&robin, p)).collect();
    let worst = (1..points.len())
        .map(|k| ((from_green[k] - from_green[0]) - (direct[k] - direct[0])).abs())
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    report(
        7,
        "Robin cross-validation",
        worst < 1e-3 && elapsed < Duration::from_secs(60),
        format!("max difference mismatch {worst:.2e} (< 1e-3) at N = 256, {elapsed:.2?} (< 60s)"),
    );
}

#[test]
fn criterion_08_symplectic_consistency() {
    let fields = cosine_fields(128);
    let mut rng = StdRng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let st = at(
            &fields,
            rng.random_range(0.0..1.0),
            rng.random_range(0.0..1.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        );
        let xh = dynamics::rhs(&st, &fields, Mode::Full);
        for _ in 0..100 {
            let w = Derivative::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let lhs = dynamics::symplectic_pairing(&st, &xh, &w, &fields);
            let rhs = dynamics::hamiltonian_differential(&st, &w, &fields);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    report(
        8,
        "symplectic consistency",
        worst < 1e-8,
        format!("max |Omega(X_H, w) - dH(w)| {worst:.2e} (< 1e-8) over 1000 pairs"),
    );
}

#[test]
fn criterion_09_annulus_suite() {
    let start = Instant::now();
    let mut harmonic = 0.0f64;
    let mut partition = 0.0f64;
    for r in [1.15, 1.3, 1.5, 1.7, 1.85] {
        for theta in [0.0, 1.0, 4.0] {
            for j in [Boundary::Inner, Boundary::Outer] {
                let lap = annulus::polar_laplacian(
                    |r, th| annulus::harmonic_measure(j, &AnnulusPoint::new(r, th).unwrap()),
                    r,
                    theta,
                    1e-3,
                );
                harmonic = harmonic.max(lap.abs());
            }
            let p = AnnulusPoint::new(r, theta).unwrap();
            let sum = annulus::harmonic_measure(Boundary::Inner, &p) + annulus::harmonic_measure(Boundary::Outer, &p);
            partition = partition.max((sum - 1.0).abs());
        }
    }

    let pres = CirculationPrescription::new(0.0, 1.0).unwrap();
    let stokes_exact = pres.c1() + pres.c2() == 1.0;
    let path: Vec<AnnulusPoint> = (0..6)
        .map(|k| AnnulusPoint::new(1.2 + 0.12 * k as f64, 0.5 * k as f64).unwrap())
        .collect();
    let mut hydro = Vec::new();
    let mut plain = Vec::new();
    for p in &path {
        let g = |x: [f64; 2]| {
            let q = AnnulusPoint::from_xy(x[0], x[1]).unwrap();
            annulus::hydrodynamic_green(&q, p, &pres, DEFAULT_IMAGES).unwrap()
        };
        let f = |x: [f64; 2]| {
            let q = AnnulusPoint::from_xy(x[0], x[1]).unwrap();
            annulus::annulus_green_f(&q, p, DEFAULT_IMAGES).unwrap()
        };
        hydro.push((
            annulus::circulation(g, Boundary::Inner, p, 512),
            annulus::circulation(g, Boundary::Outer, p, 512),
        ));
        plain.push(annulus::circulation(f, Boundary::Inner, p, 512));
    }
    let target_err = hydro
        .iter()
        .map(|&(c1, c2)| c1.abs().max((c2 - 1.0).abs()))
        .fold(0.0, f64::max);
    let hydro_spread = hydro.iter().map(|h| (h.0 - hydro[0].0).abs().max((h.1 - hydro[0].1).abs())).fold(0.0, f64::max);
    let plain_spread = plain.iter().map(|c| (c - plain[0]).abs()).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    report(
        9,
        "annulus suite",
        harmonic < 1e-6
            && partition < 1e-15
            && stokes_exact
            && target_err < 1e-4
            && hydro_spread < 1e-4
            && plain_spread > 1e-2
            && elapsed < Duration::from_secs(30),
        format!(
            "harmonicity {harmonic:.1e} (< 1e-6), |w1 + w2 - 1| {partition:.1e}, c1 + c2 = 1 exactly {stokes_exact}, \
             circulation error vs (0, 1) {target_err:.1e} (< 1e-4), spread along path {hydro_spread:.1e} (< 1e-4), \
             plain F spread {plain_spread:.2e} (> 1e-2), {elapsed:.2?} (< 30s)"
        ),
    );
}

#[test]
fn criterion_10_stability_at_robin_minimum() {
    let fields = cosine_fields(128);
    // R depends on s only and is minimal on the line s = 1/2
    let robin_s = |s: f64| fields.robin_at(&TorusPoint::from_lattice(fields.lattice(), s, 0.0));
    let r_min = robin_s(0.5);
    for k in 0..200 {
        assert!(robin_s(k as f64 / 200.0) >= r_min - 1e-15);
    }
    let st0 = at(&fields, 0.5 + 1e-3, 0.3, 0.0, 0.0);
    let h0 = dynamics::hamiltonian(&st0, &fields).h;
    // sublevel set {R <= 2 H(0)} around s = 1/2, by bisection on each side
    let level = 2.0 * h0;
    let edge = |dir: f64| {
        let (mut lo, mut hi) = (0.0, 0.25);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if robin_s(0.5 + dir * mid) <= level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    let bound = edge(1.0).max(edge(-1.0));
    let cfg = DynamicsConfig { t_final: 50.0, ..Default::default() };
    let traj = dynamics::integrate(&st0, &cfg, &fields).unwrap();
    let excursion = traj.states.iter().map(|s| periodic_gap(s.p.s, 0.5)).fold(0.0, f64::max);
    let drift = traj.max_energy_drift();
    let eta_cap = 2.0 * (h0 - 0.5 * r_min);
    let eta_max = traj.energies.iter().map(|e| 2.0 * e.eta_part).fold(0.0, f64::max);
    let r_excess = traj.states.iter().map(|s| fields.robin_at(&s.p) - level).fold(f64::MIN, f64::max);
    // H(0) lies on the boundary of its own sublevel set, so allow rounding slack
    let slack = 1e-12;
    report(
        10,
        "stability at Robin minimum",
        r_excess <= slack && excursion <= bound + 1e-9 && drift < 1e-10 && eta_max <= eta_cap + slack,
        format!(
            "max R(p) - 2H(0) {r_excess:.1e} (<= {slack:.0e}); max |s - 1/2| {excursion:.6e} <= level-set bound {bound:.6e}; \
             H drift {drift:.1e}; max int eta^*eta {eta_max:.4e} <= {eta_cap:.4e}"
        ),
    );
}
