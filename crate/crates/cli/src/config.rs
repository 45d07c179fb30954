//! Scenario configuration: JSON parsing, defaults and validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;
use torus_vortex::dynamics::{DynamicsConfig, DynamicsError, DynamicsFields, Integrator, Mode};
use torus_vortex::field::{self, ConformalSpec, PeriodicGrid};
use torus_vortex::geometry::{HarmonicCoeffs, LatticeBasis};
use torus_vortex::VortexState;

pub const DEFAULT_GRID: usize = 128;
pub const DEFAULT_OUT_DIR: &str = "out";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation error: {0}")]
    Validation(String),
}

impl ConfigError {
    fn from_json(err: serde_json::Error) -> Self {
        let message = err.to_string();
        // serde_json appends " at line L column C"; keep the bare message
        let message = match message.rfind(" at line ") {
            Some(idx) => message[..idx].to_string(),
            None => message,
        };
        ConfigError::Parse {
            line: err.line(),
            column: err.column(),
            message,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeSection {
    pub ax: f64,
    pub ay: f64,
    pub bx: f64,
    pub by: f64,
}

impl Default for LatticeSection {
    fn default() -> Self {
        Self {
            ax: 1.0,
            ay: 0.0,
            bx: 0.0,
            by: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n: usize,
    pub m: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            n: DEFAULT_GRID,
            m: DEFAULT_GRID,
        }
    }
}

/// Initial vortex position in plane coordinates and harmonic coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    pub x: f64,
    pub y: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsSection {
    pub mode: Mode,
    pub integrator: Integrator,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub record_every: usize,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        let d = DynamicsConfig::default();
        Self {
            mode: d.mode,
            integrator: d.integrator,
            dt: d.dt,
            t_final: d.t_final,
            record_every: d.record_every,
        }
    }
}

impl From<DynamicsSection> for DynamicsConfig {
    fn from(d: DynamicsSection) -> Self {
        DynamicsConfig {
            mode: d.mode,
            integrator: d.integrator,
            dt: d.dt,
            t_final: d.t_final,
            record_every: d.record_every,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from(DEFAULT_OUT_DIR),
        }
    }
}

/// The on-disk configuration; every section is optional.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub lattice: LatticeSection,
    pub conformal: ConformalSpec,
    pub grid: GridSection,
    pub initial: InitialSection,
    pub dynamics: DynamicsSection,
    pub output: OutputSection,
}

/// A validated configuration with the derived objects built.
#[derive(Debug, Clone)]
pub struct Scenario {
    /// Resolved configuration; the lattice is the normalized one.
    pub config: ScenarioConfig,
    pub grid: PeriodicGrid,
    pub initial: VortexState,
    pub warnings: Vec<String>,
}

impl Scenario {
    pub fn dynamics(&self) -> DynamicsConfig {
        self.config.dynamics.into()
    }

    pub fn build_fields(&self) -> Result<DynamicsFields, ConfigError> {
        DynamicsFields::build(&self.config.conformal, &self.grid).map_err(|e| ConfigError::Validation(e.to_string()))
    }
}

pub fn parse_value(text: &str) -> Result<Value, ConfigError> {
    serde_json::from_str(text).map_err(ConfigError::from_json)
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    serde_json::from_str(text).map_err(ConfigError::from_json)
}

pub fn from_value(value: Value) -> Result<ScenarioConfig, ConfigError> {
    serde_json::from_value(value).map_err(|e| ConfigError::Validation(e.to_string()))
}

pub fn read_config_text(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads, parses and validates a configuration file.
pub fn load_config(path: &Path) -> Result<Scenario, ConfigError> {
    resolve(parse_config(&read_config_text(path)?)?)
}

/// Applies the type invariants and builds the scenario objects.
pub fn resolve(mut config: ScenarioConfig) -> Result<Scenario, ConfigError> {
    let mut warnings = Vec::new();
    let l = config.lattice;
    let lattice = LatticeBasis::new(l.ax, l.ay, l.bx, l.by).map_err(|e| ConfigError::Validation(e.to_string()))?;
    let det = l.ax * l.by - l.ay * l.bx;
    if (det - 1.0).abs() > 1e-12 {
        warnings.push(format!("lattice rescaled by det^(-1/2) to unit area (input determinant {det})"));
    }
    let [ax, ay] = lattice.a();
    let [bx, by] = lattice.b();
    config.lattice = LatticeSection { ax, ay, bx, by };

    let grid = PeriodicGrid::new(lattice, config.grid.n, config.grid.m).map_err(|e| ConfigError::Validation(e.to_string()))?;
    // sampling checks mode resolution and positivity of the metric
    field::sample_conformal_factor(&config.conformal, &grid).map_err(|e| ConfigError::Validation(e.to_string()))?;

    let dynamics: DynamicsConfig = config.dynamics.into();
    dynamics.validate().map_err(|e| match e {
        DynamicsError::InvalidConfig(what) => ConfigError::Validation(what.to_string()),
        other => ConfigError::Validation(other.to_string()),
    })?;

    let init = config.initial;
    if ![init.x, init.y, init.a, init.b].iter().all(|v| v.is_finite()) {
        return Err(ConfigError::Validation("initial state must be finite".to_string()));
    }
    let initial = VortexState::new(&lattice, init.x, init.y, HarmonicCoeffs::new(init.a, init.b));
    Ok(Scenario {
        config,
        grid,
        initial,
        warnings,
    })
}
