use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_torus-vortex"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_rows(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn flat_torus_x_advances_linearly() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "flat.json",
        r#"{"grid": {"n": 16, "m": 16}, "initial": {"x": 0.3, "y": 0.7, "A": 1}, "dynamics": {"T": 2, "record_every": 10}}"#,
    );
    let out = tmp.path().join("run");
    let res = run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("final H drift"), "{stdout}");

    let (header, rows) = read_rows(&out.join("trajectory_full.csv"));
    assert_eq!(header, "time,x,y,s,t,A,B,H,robinPart,etaPart");
    assert_eq!(rows.len(), 201);
    for r in &rows {
        let expected = (0.3 + r[0]).rem_euclid(1.0);
        let d = (r[1] - expected).abs();
        assert!(d.min(1.0 - d) < 1e-10, "{r:?}");
        assert!((r[2] - 0.7).abs() < 1e-10);
    }
    let meta: Value = serde_json::from_str(&fs::read_to_string(out.join("trajectory_full.json")).unwrap()).unwrap();
    assert_eq!(meta["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(meta["config"]["dynamics"]["integrator"], "rk4");
    assert!(meta["tolerances"]["equilibrium"].is_number());
    assert!(meta["conventions"]["robin_constant"].is_string());
}

#[test]
fn equilibrium_rows_are_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "eq.json",
        r#"{"grid": {"n": 32, "m": 32}, "conformal": [{"k1": 1, "k2": 0, "cos": 0.5}],
            "initial": {"x": 0.5, "y": 0.25}, "dynamics": {"T": 1}}"#,
    );
    let out = tmp.path().join("eq");
    assert!(run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
    let (_, rows) = read_rows(&out.join("trajectory_full.csv"));
    for r in &rows {
        for k in 1..7 {
            assert!((r[k] - rows[0][k]).abs() < 1e-10, "column {k}: {r:?}");
        }
    }
}

#[test]
fn full_and_incomplete_runs_differ_and_both_are_written() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "cos.json",
        r#"{"grid": {"n": 32, "m": 32}, "conformal": [{"k1": 1, "k2": 0, "cos": 0.5}],
            "initial": {"x": 0.25, "y": 0.0}, "dynamics": {"T": 1, "record_every": 100}}"#,
    );
    let out = tmp.path().join("modes");
    let o = out.to_str().unwrap();
    assert!(run(&["simulate", "--config", &cfg, "--mode", "full", "--out", o]).status.success());
    assert!(run(&["simulate", "--config", &cfg, "--mode", "incomplete", "--out", o]).status.success());
    let (_, full) = read_rows(&out.join("trajectory_full.csv"));
    let (_, inc) = read_rows(&out.join("trajectory_incomplete.csv"));
    assert!(out.join("trajectory_full.json").exists() && out.join("trajectory_incomplete.json").exists());
    let last_full = full.last().unwrap();
    let last_inc = inc.last().unwrap();
    assert!((last_full[5] - last_inc[5]).abs() > 1e-4, "A differs");
    assert!(inc.iter().all(|r| r[5] == 0.0 && r[6] == 0.0));
}

#[test]
fn identical_configs_give_identical_bytes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "det.json",
        r#"{"grid": {"n": 32, "m": 16}, "conformal": [{"k1": 1, "k2": 1, "cos": 0.2, "sin": 0.1}],
            "lattice": {"ax": 1, "ay": 0.1, "bx": 0.3, "by": 1.2},
            "initial": {"x": 0.1, "y": 0.4, "A": 0.5, "B": -0.2}, "dynamics": {"T": 0.5, "integrator": "implicit_midpoint"}}"#,
    );
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = tmp.path().join(format!("r{k}"));
        assert!(run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
        assert!(run(&["fields", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
        let mut names: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        outputs.push(names.iter().map(|n| (n.clone(), fs::read(out.join(n)).unwrap())).collect::<Vec<_>>());
    }
    assert_eq!(outputs[0].len(), 2 + 8);
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn field_export_shapes_and_symmetry() {
    let tmp = TempDir::new().unwrap();
    let flat = write_config(tmp.path(), "flat.json", r#"{"grid": {"n": 16, "m": 8}}"#);
    let out = tmp.path().join("flat");
    assert!(run(&["fields", "--config", &flat, "--out", out.to_str().unwrap()]).status.success());
    for name in ["lambda2", "phi", "robin", "robin_differential_norm"] {
        let (header, rows) = read_rows(&out.join(format!("{name}.csv")));
        assert_eq!(header, "s,t,x,y,value");
        assert_eq!(rows.len(), 16 * 8);
        assert!(out.join(format!("{name}.json")).exists());
    }
    let (_, robin) = read_rows(&out.join("robin.csv"));
    assert!(robin.iter().all(|r| r[4] == 0.0));

    let single = write_config(
        tmp.path(),
        "single.json",
        r#"{"grid": {"n": 16, "m": 16}, "conformal": [{"k1": 1, "k2": 0, "cos": 0.5}]}"#,
    );
    let out = tmp.path().join("single");
    assert!(run(&["fields", "--config", &single, "--out", out.to_str().unwrap()]).status.success());
    let (_, robin) = read_rows(&out.join("robin.csv"));
    let mut spread = 0.0f64;
    for r in &robin {
        let same_s = robin.iter().filter(|q| q[0] == r[0]);
        for q in same_s {
            assert!((q[4] - r[4]).abs() < 1e-14, "R varies along t");
        }
        spread = spread.max((r[4] - robin[0][4]).abs());
    }
    assert!(spread > 1e-3, "R varies along s");
}

#[test]
fn verify_passes_and_report_matches_schema() {
    let tmp = TempDir::new().unwrap();
    let report = tmp.path().join("reports/verify.json");
    let res = run(&["verify", "--json", report.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stdout));
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["tool"], "torus-vortex");
    assert_eq!(v["passed"], true);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.len() >= 25);
    for c in checks {
        assert!(c["name"].is_string());
        for key in ["value", "target", "tolerance"] {
            assert!(c[key].is_number(), "{c}");
        }
        assert!(matches!(c["comparison"].as_str(), Some("within" | "above")));
        assert_eq!(c["pass"], true, "{c}");
    }
    let notes = v["notes"].as_array().unwrap();
    assert!(notes.iter().any(|n| n["name"] == "annulus.reciprocal_boundary_form_harmonicity" && n["value"].as_f64().unwrap() > 1e-3));
}

#[test]
fn verify_with_config_adds_scenario_checks() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "sc.json",
        r#"{"grid": {"n": 32, "m": 32}, "conformal": [{"k1": 0, "k2": 1, "sin": 0.3}],
            "initial": {"x": 0.2, "y": 0.1, "A": 0.4}, "dynamics": {"T": 1}}"#,
    );
    let res = run(&["verify", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&res.stdout).unwrap();
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"scenario.energy_drift"));
    assert!(names.contains(&"scenario.green_gauge"));
}

#[test]
fn injected_star_fault_fails_with_exit_two() {
    let res = run(&["verify", "--inject-fault", "star-sign"]);
    assert_eq!(res.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(v["passed"], false);
    let failed: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, vec!["geometry.pqr_closed_vs_quadrature"]);
}

#[test]
fn config_errors_exit_one_with_message() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("x");
    let o = out.to_str().unwrap();

    let dt = write_config(tmp.path(), "dt.json", r#"{"dynamics": {"dt": 0}}"#);
    let res = run(&["simulate", "--config", &dt, "--out", o]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("validation error: dt > 0"));

    let parse = write_config(tmp.path(), "bad.json", "{\n  \"grid\": {\"n\": 16,,}\n}");
    let res = run(&["fields", "--config", &parse, "--out", o]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("parse error at line 2"));

    let unknown = write_config(tmp.path(), "unknown.json", r#"{"dynamics": {"steps": 3}}"#);
    let res = run(&["simulate", "--config", &unknown, "--out", o]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("unknown field"));

    let missing = tmp.path().join("missing.json");
    assert_eq!(run(&["simulate", "--config", missing.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["simulate"]).status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn rescaled_lattice_warning_lands_in_metadata() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "det2.json",
        r#"{"lattice": {"ax": 2, "ay": 0, "bx": 0, "by": 1}, "grid": {"n": 8, "m": 8}, "dynamics": {"T": 0.01}}"#,
    );
    let out = tmp.path().join("w");
    let res = run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("warning: lattice rescaled"));
    let meta: Value = serde_json::from_str(&fs::read_to_string(out.join("trajectory_full.json")).unwrap()).unwrap();
    assert_eq!(meta["warnings"].as_array().unwrap().len(), 1);
    let ax = meta["config"]["lattice"]["ax"].as_f64().unwrap();
    assert!((ax - 2f64.sqrt()).abs() < 1e-14);
}

#[test]
fn sweep_writes_members_in_order() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "base.json",
        r#"{"grid": {"n": 16, "m": 16}, "conformal": [{"k1": 1, "k2": 0, "cos": 0.5}],
            "initial": {"x": 0.1, "y": 0.3, "A": 1}, "dynamics": {"T": 0.5, "record_every": 50}}"#,
    );
    let mut summaries = Vec::new();
    for k in 0..2 {
        let out = tmp.path().join(format!("sweep{k}"));
        let res = run(&["sweep", "--config", &cfg, "--vary", "initial.x=0.1:0.4:4", "--out", out.to_str().unwrap()]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        let text = fs::read_to_string(out.join("sweep.csv")).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,value,initial_H,final_H,max_H_drift,dir");
        assert_eq!(lines.len(), 5);
        for (i, line) in lines[1..].iter().enumerate() {
            let dir = format!("scenario_{i:03}");
            assert!(line.starts_with(&format!("{i},")) && line.ends_with(&dir));
            assert!(out.join(&dir).join("trajectory_full.csv").exists());
        }
        assert!(out.join("sweep.json").exists());
        summaries.push((text, fs::read(out.join("scenario_002/trajectory_full.csv")).unwrap()));
    }
    assert_eq!(summaries[0], summaries[1]);

    let res = run(&["sweep", "--config", &cfg, "--vary", "dynamics.dt=0:1:2", "--out", tmp.path().join("bad").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    let res = run(&["sweep", "--config", &cfg, "--vary", "nonsense", "--out", tmp.path().join("bad").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
}
