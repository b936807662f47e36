//! Experiment specifications and the replication runner.
//!
//! An experiment takes a base scenario, applies fixed overrides, then
//! varies one parameter over a list of levels. Every (level, replication)
//! pair is an independent run. With common random numbers (the default)
//! replication `i` uses the same stream lineage at every level.
//!
//! ```toml
//! name = "wom-sweep"
//! scenario = "atv"
//! parameter = "wom.adoption_fraction"
//! levels = [0.0, 0.5, 1.0]
//! replications = 20
//! days = 70
//! tests = [[0, 2]]
//!
//! [overrides]
//! mode = "noise-reduction"
//! ```

use crate::agents::SimError;
use crate::config::{bundled_scenario, load_scenario, ConfigError, ScenarioConfig};
use crate::engine::run_replication;
use crate::metrics::RunOutput;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error("run failed at level {level}, replication {replication}: {source}")]
    Run {
        level: String,
        replication: u64,
        source: SimError,
    },
    #[error("cannot start worker threads: {0}")]
    Threads(String),
}

fn default_replications() -> u32 {
    20
}

fn default_days() -> usize {
    70
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    /// Bundled scenario name, or a path relative to the spec file.
    pub scenario: String,
    /// Dotted path of the swept field, e.g. `pool_size` or
    /// `wom.adoption_fraction`. Without one the experiment has a single
    /// level, `base`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<String>,
    #[serde(default)]
    pub levels: Vec<toml::Value>,
    #[serde(default = "default_replications")]
    pub replications: u32,
    #[serde(default = "default_days")]
    pub days: usize,
    /// Master seed; the scenario's own seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_true")]
    pub common_random_numbers: bool,
    /// Level index pairs to compare.
    #[serde(default)]
    pub tests: Vec<[usize; 2]>,
    /// Dotted-path overrides applied to the base scenario before sweeping.
    #[serde(default)]
    pub overrides: toml::Table,
}

const BUNDLED: [(&str, &str); 3] = [
    ("pool-size-sweep", include_str!("../../experiments/pool-size-sweep.toml")),
    ("mode-comparison", include_str!("../../experiments/mode-comparison.toml")),
    ("wom-sweep", include_str!("../../experiments/wom-sweep.toml")),
];

pub fn bundled_experiment_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

pub fn bundled_experiment(name: &str) -> Option<ExperimentSpec> {
    let name = name.strip_suffix(".toml").unwrap_or(name);
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| ExperimentSpec::from_toml_str(text).expect("bundled spec parses"))
}

/// Loads a spec from a file, falling back to the bundled specs by name.
/// Returns the spec and the directory its relative paths resolve against.
pub fn resolve_experiment(name_or_path: &str) -> Result<(ExperimentSpec, PathBuf), ExperimentError> {
    let path = Path::new(name_or_path);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        return Ok((ExperimentSpec::from_toml_str(&text)?, dir));
    }
    bundled_experiment(name_or_path)
        .map(|s| (s, PathBuf::new()))
        .ok_or_else(|| {
            ExperimentError::InvalidSpec(format!(
                "{name_or_path} is neither a file nor a bundled experiment ({})",
                bundled_experiment_names().collect::<Vec<_>>().join(", ")
            ))
        })
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> Result<Self, ExperimentError> {
        let spec: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("spec serialises")
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::InvalidSpec(m));
        match (&self.parameter, self.levels.len()) {
            (Some(p), 0) => return bad(format!("parameter {p} needs at least one level")),
            (None, n) if n > 0 => return bad("levels given without a parameter".into()),
            _ => {}
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if !self.tests.is_empty() && self.replications < 2 {
            return bad("statistical tests need at least 2 replications".into());
        }
        if self.days == 0 {
            return bad("days must be at least 1".into());
        }
        let n = self.level_count();
        for [a, b] in &self.tests {
            if *a >= n || *b >= n || a == b {
                return bad(format!("test pair [{a}, {b}] does not name two of the {n} levels"));
            }
        }
        Ok(())
    }

    pub fn level_count(&self) -> usize {
        self.levels.len().max(1)
    }

    pub fn level_labels(&self) -> Vec<String> {
        if self.parameter.is_none() {
            return vec!["base".to_string()];
        }
        self.levels.iter().map(label).collect()
    }

    /// Base scenario with overrides, run length and seed applied.
    pub fn base_scenario(&self, base_dir: &Path) -> Result<ScenarioConfig, ExperimentError> {
        let local = base_dir.join(&self.scenario);
        let mut config = if local.is_file() {
            load_scenario(&local)?
        } else {
            bundled_scenario(&self.scenario)?
        };
        config.run_length_days = self.days;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        let overrides: Vec<(String, toml::Value)> = flatten_overrides("", &self.overrides);
        apply(&config, &overrides)
    }

    /// One fully resolved scenario per level.
    pub fn level_scenarios(&self, base_dir: &Path) -> Result<Vec<ScenarioConfig>, ExperimentError> {
        let base = self.base_scenario(base_dir)?;
        match &self.parameter {
            None => Ok(vec![base]),
            Some(p) => self
                .levels
                .iter()
                .map(|v| apply(&base, &[(p.clone(), v.clone())]))
                .collect(),
        }
    }

    /// Stream lineage used for a run.
    pub fn lineage(&self, level: usize, replication: u32) -> u64 {
        if self.common_random_numbers {
            u64::from(replication)
        } else {
            level as u64 * u64::from(self.replications) + u64::from(replication)
        }
    }
}

fn label(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
    .replace([',', '\n', '"'], "_")
}

/// Nested override tables become dotted keys; a literal dotted key also
/// works.
fn flatten_overrides(prefix: &str, table: &toml::Table) -> Vec<(String, toml::Value)> {
    let mut out = Vec::new();
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            toml::Value::Table(t) => out.extend(flatten_overrides(&key, t)),
            other => out.push((key, other.clone())),
        }
    }
    out
}

/// Returns a copy of `config` with each dotted path set, revalidated.
pub fn apply(config: &ScenarioConfig, settings: &[(String, toml::Value)]) -> Result<ScenarioConfig, ExperimentError> {
    let mut root = toml::Value::try_from(config).expect("scenario converts to TOML");
    for (path, value) in settings {
        let mut node = &mut root;
        let parts: Vec<&str> = path.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            let table = node
                .as_table_mut()
                .ok_or_else(|| ExperimentError::InvalidSpec(format!("{path}: {part} is not inside a table")))?;
            if i + 1 == parts.len() {
                table.insert(part.to_string(), value.clone());
                break;
            }
            node = table
                .get_mut(*part)
                .ok_or_else(|| ExperimentError::InvalidSpec(format!("{path}: no field {part}")))?;
        }
    }
    let out: ScenarioConfig = root
        .try_into()
        .map_err(|e: toml::de::Error| ExperimentError::InvalidSpec(e.to_string()))?;
    out.validate()?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    pub label: String,
    pub runs: Vec<RunOutput>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub levels: Vec<LevelResult>,
}

/// Runs every (level, replication) pair on up to `jobs` threads. Results
/// come back ordered by level, then replication, whatever the scheduling.
pub fn run_experiment(spec: &ExperimentSpec, base_dir: &Path, jobs: usize) -> Result<ExperimentResult, ExperimentError> {
    spec.validate()?;
    let configs = spec.level_scenarios(base_dir)?;
    let labels = spec.level_labels();
    let tasks: Vec<(usize, u32)> = (0..configs.len())
        .flat_map(|l| (0..spec.replications).map(move |r| (l, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| ExperimentError::Threads(e.to_string()))?;
    let outputs: Vec<Result<RunOutput, ExperimentError>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(l, r)| {
                let lineage = spec.lineage(l, r);
                run_replication(&configs[l], lineage).map_err(|source| ExperimentError::Run {
                    level: labels[l].clone(),
                    replication: lineage,
                    source,
                })
            })
            .collect()
    });
    let mut levels: Vec<LevelResult> = labels
        .into_iter()
        .map(|label| LevelResult {
            label,
            runs: Vec::with_capacity(spec.replications as usize),
        })
        .collect();
    for (&(l, _), out) in tasks.iter().zip(outputs) {
        levels[l].runs.push(out?);
    }
    Ok(ExperimentResult {
        spec: spec.clone(),
        levels,
    })
}
