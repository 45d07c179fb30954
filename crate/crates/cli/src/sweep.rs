//! Parameter sweeps over one dotted configuration key.

use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{Map, Number, Value};
use thiserror::Error;

use crate::config::{self, ConfigError, Scenario};

#[derive(Debug, Error, PartialEq)]
pub enum SweepError {
    #[error("expected KEY=START:STOP:STEPS, got {0:?}")]
    Syntax(String),
    #[error("STEPS must be at least 1")]
    NoSteps,
    #[error("cannot set {key}: {reason}")]
    BadKey { key: String, reason: String },
}

/// `KEY=START:STOP:STEPS`, with `STEPS` evenly spaced values including both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub key: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl FromStr for SweepSpec {
    type Err = SweepError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let syntax = || SweepError::Syntax(text.to_string());
        let (key, range) = text.split_once('=').ok_or_else(syntax)?;
        let parts: Vec<&str> = range.split(':').collect();
        if key.is_empty() || parts.len() != 3 {
            return Err(syntax());
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| syntax())?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| syntax())?;
        let steps: usize = parts[2].trim().parse().map_err(|_| syntax())?;
        if !start.is_finite() || !stop.is_finite() {
            return Err(syntax());
        }
        if steps == 0 {
            return Err(SweepError::NoSteps);
        }
        Ok(Self {
            key: key.trim().to_string(),
            start,
            stop,
            steps,
        })
    }
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| self.start + (self.stop - self.start) * (k as f64 / last))
            .collect()
    }
}

fn json_number(v: f64) -> Value {
    // integral values stay integers so that integer fields such as grid sizes accept them
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        Value::Number(Number::from(v as i64))
    } else {
        Number::from_f64(v).map_or(Value::Null, Value::Number)
    }
}

/// Sets a dotted path such as `dynamics.dt` or `conformal.0.cos`, creating
/// intermediate objects as needed.
pub fn set_path(root: &mut Value, key: &str, v: f64) -> Result<(), SweepError> {
    let bad = |reason: &str| SweepError::BadKey {
        key: key.to_string(),
        reason: reason.to_string(),
    };
    let parts: Vec<&str> = key.split('.').collect();
    let mut node = root;
    for (depth, part) in parts.iter().enumerate() {
        let leaf = depth + 1 == parts.len();
        if node.is_null() {
            *node = Value::Object(Map::new());
        }
        node = match node {
            Value::Object(map) => {
                let entry = map.entry(part.to_string()).or_insert(Value::Null);
                if leaf {
                    *entry = json_number(v);
                    return Ok(());
                }
                entry
            }
            Value::Array(items) => {
                let idx: usize = part.parse().map_err(|_| bad("array index expected"))?;
                let entry = items.get_mut(idx).ok_or_else(|| bad("array index out of range"))?;
                if leaf {
                    *entry = json_number(v);
                    return Ok(());
                }
                entry
            }
            _ => return Err(bad("path passes through a scalar")),
        };
    }
    Err(bad("empty key"))
}

/// One resolved member of a sweep.
#[derive(Debug, Clone)]
pub struct Member {
    pub index: usize,
    pub value: f64,
    pub scenario: Scenario,
}

/// Expands a base configuration into validated scenarios, in index order.
pub fn expand(base: &Value, spec: &SweepSpec) -> Result<Vec<Member>, ConfigError> {
    spec.values()
        .into_iter()
        .enumerate()
        .map(|(index, value)| {
            let mut doc = base.clone();
            set_path(&mut doc, &spec.key, value).map_err(|e| ConfigError::Validation(e.to_string()))?;
            let scenario = config::resolve(config::from_value(doc)?)
                .map_err(|e| ConfigError::Validation(format!("sweep member {index} ({}={value}): {e}", spec.key)))?;
            Ok(Member { index, value, scenario })
        })
        .collect()
}

/// Runs `job` on every member in parallel; results come back in index order.
pub fn run_all<T: Send, E: Send>(
    members: &[Member],
    job: impl Fn(&Member) -> Result<T, E> + Sync + Send,
) -> Result<Vec<T>, E> {
    members.par_iter().map(job).collect::<Vec<_>>().into_iter().collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    pub initial_h: f64,
    pub final_h: f64,
    pub max_h_drift: f64,
    pub dir: String,
}
