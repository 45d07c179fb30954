//! `torus-vortex`: simulate, export fields, verify and sweep.

mod config;
mod export;
mod sweep;
mod verify;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use torus_vortex::dynamics::{self, Mode};

use crate::config::{ConfigError, Scenario};
use crate::export::RunSummary;
use crate::sweep::{SweepRow, SweepSpec};

#[derive(Debug, Parser)]
#[command(name = "torus-vortex", version, about = "Point vortex dynamics on a flat or conformally curved torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    Incomplete,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => Mode::Full,
            ModeArg::Incomplete => Mode::Incomplete,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FaultArg {
    StarSign,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the vortex and write the trajectory CSV with JSON metadata.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `dynamics.mode` from the configuration.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Overrides `output.dir` from the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write lambda^2, phi, R and |dR| on the grid as CSV.
    Fields {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the invariant suite; exit status 2 if any check fails.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Where to write the JSON report; printed to standard output otherwise.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
    /// Simulate a family of scenarios varying one configuration key.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// `KEY=START:STOP:STEPS`, for example `dynamics.dt=0.001:0.004:4`.
        #[arg(long)]
        vary: SweepSpec,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Runtime(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("verification failed: {0} check(s) did not pass")]
    Verification(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn simulate_scenario(scenario: &Scenario, out: &Path) -> Result<RunSummary, CliError> {
    let fields = scenario.build_fields()?;
    let cfg = scenario.dynamics();
    let traj = dynamics::integrate(&scenario.initial, &cfg, &fields).map_err(|e| CliError::Runtime(e.to_string()))?;
    let summary = RunSummary::of(&traj, cfg.steps());
    export::write_trajectory(out, scenario, &traj, &summary).map_err(io_err(out))?;
    Ok(summary)
}

fn cmd_simulate(config: &Path, mode: Option<ModeArg>, out: Option<PathBuf>) -> Result<(), CliError> {
    let mut scenario = config::load_config(config)?;
    if let Some(m) = mode {
        scenario.config.dynamics.mode = m.into();
    }
    let dir = out.unwrap_or_else(|| scenario.config.output.dir.clone());
    for w in &scenario.warnings {
        eprintln!("warning: {w}");
    }
    let summary = simulate_scenario(&scenario, &dir)?;
    let stem = export::trajectory_file_stem(scenario.config.dynamics.mode);
    println!("wrote {}", dir.join(format!("{stem}.csv")).display());
    println!("final H drift: {:e}", summary.final_h_drift);
    println!("max H drift: {:e}", summary.max_h_drift);
    Ok(())
}

fn cmd_fields(config: &Path, out: &Path) -> Result<(), CliError> {
    let scenario = config::load_config(config)?;
    for w in &scenario.warnings {
        eprintln!("warning: {w}");
    }
    let fields = scenario.build_fields()?;
    export::write_fields(out, &scenario, &fields).map_err(io_err(out))?;
    println!("wrote {} field grids to {}", export::FIELD_NAMES.len(), out.display());
    Ok(())
}

fn cmd_verify(config: Option<&Path>, json_path: Option<&Path>, fault: Option<FaultArg>) -> Result<(), CliError> {
    let scenario = config.map(config::load_config).transpose()?;
    let fault = match fault {
        Some(FaultArg::StarSign) => verify::Fault::StarSign,
        None => verify::Fault::None,
    };
    let report = verify::run(scenario.as_ref(), fault).map_err(CliError::Runtime)?;
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))? + "\n";
    match json_path {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(io_err(parent))?;
            }
            fs::write(path, &text).map_err(io_err(path))?;
            for c in &report.checks {
                println!("[{}] {} = {:e}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value);
            }
        }
        None => print!("{text}"),
    }
    let failed = report.checks.iter().filter(|c| !c.pass).count();
    if failed > 0 {
        return Err(CliError::Verification(failed));
    }
    Ok(())
}

fn cmd_sweep(config: &Path, spec: &SweepSpec, out: &Path) -> Result<(), CliError> {
    let base = config::parse_value(&config::read_config_text(config)?)?;
    // the base file must be valid on its own
    config::resolve(config::parse_config(&config::read_config_text(config)?)?)?;
    let members = sweep::expand(&base, spec)?;
    let width = members.len().saturating_sub(1).to_string().len().max(3);
    let rows = sweep::run_all(&members, |m| {
        let name = format!("scenario_{:0width$}", m.index);
        let summary = simulate_scenario(&m.scenario, &out.join(&name))?;
        Ok::<_, CliError>(SweepRow {
            index: m.index,
            value: m.value,
            initial_h: summary.initial_h,
            final_h: summary.final_h,
            max_h_drift: summary.max_h_drift,
            dir: name,
        })
    })?;
    let mut csv = String::from("index,value,initial_H,final_H,max_H_drift,dir\n");
    for r in &rows {
        writeln!(csv, "{},{},{},{},{},{}", r.index, r.value, r.initial_h, r.final_h, r.max_h_drift, r.dir)
            .expect("writing to a String");
    }
    let summary_path = out.join("sweep.csv");
    fs::write(&summary_path, csv).map_err(io_err(&summary_path))?;
    let meta = json!({
        "tool": export::TOOL_NAME,
        "version": export::TOOL_VERSION,
        "kind": "sweep",
        "key": spec.key,
        "start": spec.start,
        "stop": spec.stop,
        "steps": spec.steps,
        "base_config": base,
        "members": rows,
    });
    let meta_path = out.join("sweep.json");
    export::write_json(&meta_path, &meta).map_err(io_err(&meta_path))?;
    println!("wrote {} scenarios to {}", rows.len(), out.display());
    Ok(())
}

fn main() -> ExitCode {
    // usage errors exit with 1, keeping 2 for failed verification
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Simulate { config, mode, out } => cmd_simulate(config, *mode, out.clone()),
        Command::Fields { config, out } => cmd_fields(config, out),
        Command::Verify {
            config,
            json,
            inject_fault,
        } => cmd_verify(config.as_deref(), json.as_deref(), *inject_fault),
        Command::Sweep { config, vary, out } => cmd_sweep(config, vary, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
