//! CSV and JSON writers. Floats are printed in Rust's shortest round-trip
//! form, so identical runs give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use torus_vortex::dynamics::{self, DynamicsFields, Mode, Trajectory};
use torus_vortex::field::{self, ScalarField, RING_POINTS, ZERO_MEAN_TOL};

use crate::config::Scenario;

pub const TOOL_NAME: &str = "torus-vortex";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const TRAJECTORY_HEADER: &str = "time,x,y,s,t,A,B,H,robinPart,etaPart";
pub const FIELD_HEADER: &str = "s,t,x,y,value";

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(64 * (traj.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for ((time, st), e) in traj.times.iter().zip(&traj.states).zip(&traj.energies) {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            time, st.p.x, st.p.y, st.p.s, st.p.t, st.eta.a, st.eta.b, e.h, e.robin_part, e.eta_part
        )
        .expect("writing to a String");
    }
    out
}

pub fn field_csv(f: &ScalarField) -> String {
    let grid = f.grid();
    let mut out = String::with_capacity(48 * (grid.len() + 1));
    out.push_str(FIELD_HEADER);
    out.push('\n');
    for i in 0..grid.n() {
        for j in 0..grid.m() {
            let p = grid.node(i, j);
            writeln!(out, "{},{},{},{},{}", p.s, p.t, p.x, p.y, f.at(i, j)).expect("writing to a String");
        }
    }
    out
}

/// Numerical conventions and tolerances recorded with every output.
pub fn conventions() -> Value {
    json!({
        "robin_constant": "additive constant 0: R = log(lambda^2)/(4 pi) + 2 phi with Laplacian(phi) = lambda^2 - 1 and mean(phi) = 0",
        "green_gauge": "discrete mean of G * lambda^2 over the torus is 0",
        "lambda2_normalization": "lambda^2 rescaled to unit mean (unit surface volume)",
        "lattice_normalization": "basis rescaled to determinant 1",
        "initial_position": "plane coordinates (x, y), wrapped into the fundamental cell",
        "nyquist_modes": "excluded from derivatives and Poisson solves",
    })
}

pub fn tolerances() -> Value {
    json!({
        "equilibrium": dynamics::EQUILIBRIUM_TOL,
        "implicit_midpoint": dynamics::MIDPOINT_TOL,
        "implicit_midpoint_max_iterations": dynamics::MIDPOINT_MAX_ITER,
        "zero_mean": ZERO_MEAN_TOL,
        "robin_ring_points": RING_POINTS,
    })
}

pub fn metadata(scenario: &Scenario, kind: &str, extra: Value) -> Value {
    let mut meta = json!({
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "kind": kind,
        "config": scenario.config,
        "warnings": scenario.warnings,
        "conventions": conventions(),
        "tolerances": tolerances(),
    });
    if let (Value::Object(map), Value::Object(more)) = (&mut meta, extra) {
        map.extend(more);
    }
    meta
}

pub fn write_json(path: &Path, value: &impl Serialize) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

pub fn trajectory_file_stem(mode: Mode) -> &'static str {
    match mode {
        Mode::Full => "trajectory_full",
        Mode::Incomplete => "trajectory_incomplete",
    }
}

/// Summary numbers of a finished run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunSummary {
    pub steps: usize,
    pub samples: usize,
    pub initial_h: f64,
    pub final_h: f64,
    pub final_h_drift: f64,
    pub max_h_drift: f64,
}

impl RunSummary {
    pub fn of(traj: &Trajectory, steps: usize) -> Self {
        let h0 = traj.energies.first().map_or(0.0, |e| e.h);
        let h1 = traj.energies.last().map_or(0.0, |e| e.h);
        Self {
            steps,
            samples: traj.len(),
            initial_h: h0,
            final_h: h1,
            final_h_drift: (h1 - h0).abs(),
            max_h_drift: traj.max_energy_drift(),
        }
    }
}

/// Writes `<stem>.csv` and `<stem>.json` for a trajectory.
pub fn write_trajectory(dir: &Path, scenario: &Scenario, traj: &Trajectory, summary: &RunSummary) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let stem = trajectory_file_stem(scenario.config.dynamics.mode);
    fs::write(dir.join(format!("{stem}.csv")), trajectory_csv(traj))?;
    let meta = metadata(
        scenario,
        "trajectory",
        json!({ "columns": TRAJECTORY_HEADER.split(',').collect::<Vec<_>>(), "summary": summary }),
    );
    write_json(&dir.join(format!("{stem}.json")), &meta)
}

pub const FIELD_NAMES: [&str; 4] = ["lambda2", "phi", "robin", "robin_differential_norm"];

/// Writes the metric-derived grids and one JSON sidecar per grid.
pub fn write_fields(dir: &Path, scenario: &Scenario, fields: &DynamicsFields) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let phi = field::conformal_potential(fields.lambda2()).map_err(io::Error::other)?;
    let grids: [(&str, &ScalarField, &str); 4] = [
        (FIELD_NAMES[0], fields.lambda2(), "conformal factor lambda^2, unit mean"),
        (FIELD_NAMES[1], &phi, "potential phi with Laplacian(phi) = lambda^2 - 1, zero mean"),
        (FIELD_NAMES[2], fields.robin(), "Robin function R"),
        (FIELD_NAMES[3], &fields.d_robin().magnitude(), "Euclidean norm of dR"),
    ];
    for (name, f, description) in grids {
        fs::write(dir.join(format!("{name}.csv")), field_csv(f))?;
        let meta = metadata(
            scenario,
            "field",
            json!({
                "field": name,
                "description": description,
                "columns": FIELD_HEADER.split(',').collect::<Vec<_>>(),
                "rows": f.grid().len(),
                "min": f.min(),
                "max": f.max(),
            }),
        );
        write_json(&dir.join(format!("{name}.json")), &meta)?;
    }
    Ok(())
}
