//! Experiment configuration: presets, file merging and `--set` overrides.
//!
//! A config file is a JSON object naming an `experiment`; every other key
//! overrides the matching key of that experiment's preset. Keys absent from
//! the preset are rejected, so typos never pass silently.

use std::f64::consts::PI;
use std::path::Path;

use nsga_pinn_core::problems::{
    BurgersProblem, BurgersSettings, GaussianNoise, PendulumProblem, PendulumSettings,
};
use nsga_pinn_core::trainer::OptimizerState;
use nsga_pinn_core::{AdamConfig, Mode, ProblemError, ProblemSpec, Refine, RunConfig, TrainError};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Pendulum,
    PendulumNoisy,
    Burgers,
    BurgersNoisy,
    SurvivalRate,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Pendulum,
        Experiment::PendulumNoisy,
        Experiment::Burgers,
        Experiment::BurgersNoisy,
        Experiment::SurvivalRate,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSettings {
    Pendulum(PendulumSettings),
    Burgers(BurgersSettings),
}

impl ProblemSettings {
    pub fn build(&self) -> Result<ProblemSpec, ProblemError> {
        Ok(match self {
            ProblemSettings::Pendulum(s) => ProblemSpec::Pendulum(PendulumProblem::new(s.clone())?),
            ProblemSettings::Burgers(s) => ProblemSpec::Burgers(BurgersProblem::new(s.clone())?),
        })
    }

    fn validate(&self) -> Result<(), ProblemError> {
        match self {
            ProblemSettings::Pendulum(s) => s.validate(),
            ProblemSettings::Burgers(s) => s.validate(),
        }
    }

    fn key(&self) -> &'static str {
        match self {
            ProblemSettings::Pendulum(_) => "problem.pendulum",
            ProblemSettings::Burgers(_) => "problem.burgers",
        }
    }
}

/// Fully resolved experiment; serialized as-is into `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub repetitions: usize,
    pub output_dir: String,
    /// Methods run in every repetition, in output order.
    pub modes: Vec<Mode>,
    /// Per-repetition master seeds; empty means `run.master_seed + r`.
    pub repetition_seeds: Vec<u64>,
    pub run: RunConfig,
    pub problem: ProblemSettings,
}

impl ExperimentConfig {
    /// Master seed of every repetition.
    pub fn seeds(&self) -> Vec<u64> {
        if self.repetition_seeds.is_empty() {
            (0..self.repetitions as u64)
                .map(|r| self.run.master_seed.wrapping_add(r))
                .collect()
        } else {
            self.repetition_seeds.clone()
        }
    }

    /// Copy with the derived seeds written out.
    pub fn with_explicit_seeds(&self) -> Self {
        Self {
            repetition_seeds: self.seeds(),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.repetitions == 0 {
            return Err(CliError::invalid("repetitions", "must be >= 1"));
        }
        if self.modes.is_empty() {
            return Err(CliError::invalid("modes", "must name at least one method"));
        }
        if !self.repetition_seeds.is_empty() && self.repetition_seeds.len() != self.repetitions {
            return Err(CliError::invalid(
                "repetition_seeds",
                format!(
                    "has {} entries for {} repetitions",
                    self.repetition_seeds.len(),
                    self.repetitions
                ),
            ));
        }
        if self.output_dir.is_empty() {
            return Err(CliError::invalid("output_dir", "must not be empty"));
        }
        self.run.validate().map_err(|e| match e {
            TrainError::InvalidConfig { field, reason } => {
                CliError::invalid(run_key(field), reason)
            }
            other => CliError::Train(other),
        })?;
        self.problem
            .validate()
            .map_err(|e| CliError::invalid(self.problem.key(), e.to_string()))
    }
}

fn run_key(field: &str) -> String {
    match field {
        "lr" | "eps" | "beta" => format!("run.adam.{field}"),
        f => format!("run.{f}"),
    }
}

fn pendulum_settings() -> PendulumSettings {
    PendulumSettings {
        hidden_layers: vec![20, 20, 20],
        n_collocation: 500,
        ..PendulumSettings::default()
    }
}

fn burgers_settings() -> BurgersSettings {
    BurgersSettings {
        hidden_layers: vec![20; 4],
        viscosity: 0.01 / PI,
        n_collocation: 2000,
        ..BurgersSettings::default()
    }
}

fn desk_run(population_size: usize, max_generations: usize, inner_adam_steps: usize) -> RunConfig {
    RunConfig {
        population_size,
        max_generations,
        inner_adam_steps,
        adam: AdamConfig::with_lr(1e-2),
        master_seed: 0,
        mode: Mode::NsgaPinn,
        refine: Refine::Pool,
        optimizer_state: OptimizerState::Inherit,
        perturb_sigma: 0.01,
    }
}

/// Built-in desk-scale configuration of each experiment.
pub fn preset(experiment: Experiment) -> ExperimentConfig {
    let both = vec![Mode::NsgaPinn, Mode::AdamOnly];
    let (repetitions, modes, run, problem) = match experiment {
        Experiment::Pendulum => (
            5,
            both,
            desk_run(20, 20, 10),
            ProblemSettings::Pendulum(pendulum_settings()),
        ),
        Experiment::PendulumNoisy => (
            5,
            both,
            desk_run(20, 20, 10),
            ProblemSettings::Pendulum(PendulumSettings {
                noise: Some(GaussianNoise {
                    mean: 0.0,
                    std: 0.1,
                    seed: 4321,
                }),
                ..pendulum_settings()
            }),
        ),
        Experiment::Burgers => (
            5,
            both,
            desk_run(10, 5, 20),
            ProblemSettings::Burgers(burgers_settings()),
        ),
        Experiment::BurgersNoisy => (
            5,
            both,
            desk_run(10, 5, 20),
            ProblemSettings::Burgers(BurgersSettings {
                noise: Some(GaussianNoise {
                    mean: 0.0,
                    std: 0.2,
                    seed: 4321,
                }),
                ..burgers_settings()
            }),
        ),
        Experiment::SurvivalRate => (
            50,
            vec![Mode::NsgaPinn],
            desk_run(20, 10, 10),
            ProblemSettings::Pendulum(pendulum_settings()),
        ),
    };
    ExperimentConfig {
        experiment,
        repetitions,
        output_dir: "results".into(),
        modes,
        repetition_seeds: Vec::new(),
        run,
        problem,
    }
}

/// Command-line adjustments applied after the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    /// `key=value` pairs; keys are dot-separated paths.
    pub sets: Vec<String>,
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    pub output_dir: Option<String>,
}

/// Reads, merges and validates a config file.
pub fn load(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::invalid("<file>", format!("malformed JSON: {e}")))?;
    resolve(value, overrides)
}

/// Merges a parsed config object with its preset and the overrides.
pub fn resolve(file: Value, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
    let Value::Object(file) = file else {
        return Err(CliError::invalid(
            "<file>",
            "top level must be a JSON object",
        ));
    };
    let experiment: Experiment = match file.get("experiment") {
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|e| CliError::invalid("experiment", format!("{e}")))?,
        None => return Err(CliError::invalid("experiment", "missing")),
    };
    let mut merged = serde_json::to_value(preset(experiment)).expect("preset serializes");
    merge(&mut merged, Value::Object(file), "")?;

    for set in &overrides.sets {
        let (key, raw) = set
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects key=value, got `{set}`")))?;
        if key == "experiment" {
            return Err(CliError::invalid(
                "experiment",
                "cannot be overridden; edit the file",
            ));
        }
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let slot = lookup(&mut merged, key)?;
        *slot = value;
    }
    if let Some(seed) = overrides.seed {
        *lookup(&mut merged, "run.master_seed")? = seed.into();
        *lookup(&mut merged, "repetition_seeds")? = Value::Array(Vec::new());
    }
    if let Some(mode) = overrides.mode {
        *lookup(&mut merged, "modes")? = serde_json::to_value([mode]).expect("mode serializes");
    }
    if let Some(dir) = &overrides.output_dir {
        *lookup(&mut merged, "output_dir")? = Value::String(dir.clone());
    }

    let config: ExperimentConfig = serde_path_to_error::deserialize(merged).map_err(|e| {
        let key = e.path().to_string();
        CliError::invalid(key, e.into_inner().to_string())
    })?;
    config.validate()?;
    Ok(config)
}

fn merge(base: &mut Value, update: Value, prefix: &str) -> Result<(), CliError> {
    match (base, update) {
        (Value::Object(b), Value::Object(u)) => {
            for (k, v) in u {
                let path = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v, &path)?,
                    None => return Err(CliError::invalid(path, "unknown key")),
                }
            }
            Ok(())
        }
        (slot, v) => {
            *slot = v;
            Ok(())
        }
    }
}

fn lookup<'a>(root: &'a mut Value, key: &str) -> Result<&'a mut Value, CliError> {
    let mut cur = root;
    for part in key.split('.') {
        cur = match cur {
            Value::Object(map) => map.get_mut(part),
            Value::Array(items) => part.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| CliError::invalid(key, "unknown key"))?;
    }
    Ok(cur)
}

/// Writes every preset as `<experiment>.json` into `dir`.
pub fn write_presets(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for exp in Experiment::ALL {
        let mut obj = Map::new();
        let full = serde_json::to_value(preset(exp)).expect("preset serializes");
        if let Value::Object(m) = full {
            obj.extend(m);
        }
        let name = serde_json::to_value(exp).expect("experiment serializes");
        let path = dir.join(format!("{}.json", name.as_str().expect("string tag")));
        let text = serde_json::to_string_pretty(&Value::Object(obj)).expect("json") + "\n";
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}
