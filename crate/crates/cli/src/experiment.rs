//! Runs a resolved experiment and writes its file set:
//!
//! ```text
//! <out>/manifest.json
//! <out>/rep_NNN/final_losses.json
//! <out>/rep_NNN/estimates.json            (pendulum only)
//! <out>/rep_NNN/<method>/generations.csv
//! <out>/rep_NNN/<method>/prediction.csv
//! <out>/rep_NNN/<method>/population.json
//! ```

use std::path::{Path, PathBuf};

use nsga_pinn_core::problems::PinnProblem;
use nsga_pinn_core::trainer::{ensemble_predict, run_with, Executor};
use nsga_pinn_core::{GenerationRecord, Mode, ObjectiveVector, ProblemSpec, RunConfig};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{
    write_generations, write_json, write_prediction, Checkpoint, Estimates, FinalLosses,
    MethodEstimate, MethodLosses,
};

#[derive(Debug, Clone)]
pub struct MethodSummary {
    pub mode: Mode,
    pub best: ObjectiveVector,
    /// Trainable problem scalar of the best individual, if any.
    pub k_hat: Option<f64>,
    pub records: Vec<GenerationRecord>,
    pub adam_steps: u64,
}

#[derive(Debug, Clone)]
pub struct RepetitionSummary {
    pub index: usize,
    pub seed: u64,
    pub methods: Vec<MethodSummary>,
}

impl RepetitionSummary {
    pub fn method(&self, mode: Mode) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.mode == mode)
    }
}

pub fn rep_dir(out: &Path, index: usize) -> PathBuf {
    out.join(format!("rep_{index:03}"))
}

/// Runs every repetition and method in order, writing outputs under
/// `config.output_dir`. `progress` receives one line per finished method.
pub fn run_experiment<E: Executor>(
    config: &ExperimentConfig,
    exec: &E,
    mut progress: impl FnMut(&str),
) -> Result<Vec<RepetitionSummary>, CliError> {
    config.validate()?;
    let out = PathBuf::from(&config.output_dir);
    let problem = config.problem.build()?;
    let grid = problem.prediction_grid();
    let k_true = match &problem {
        ProblemSpec::Pendulum(p) => Some(p.settings().k_true),
        ProblemSpec::Burgers(_) => None,
    };

    write_json(&out.join("manifest.json"), &config.with_explicit_seeds())?;

    let mut summaries = Vec::with_capacity(config.repetitions);
    for (index, seed) in config.seeds().into_iter().enumerate() {
        let dir = rep_dir(&out, index);
        let mut losses = FinalLosses::default();
        let mut estimates = Estimates::default();
        let mut methods = Vec::with_capacity(config.modes.len());
        for &mode in &config.modes {
            let run = RunConfig {
                master_seed: seed,
                mode,
                ..config.run.clone()
            };
            let outcome = run_with(&problem, &run, exec, |_| {})?;
            let method_dir = dir.join(mode.name());
            write_generations(&method_dir.join("generations.csv"), &outcome.records)?;
            let members: Vec<_> = outcome
                .population
                .iter()
                .map(|i| &i.genome.params)
                .collect();
            let ens = ensemble_predict(problem.mlp(), &members, &grid.inputs)
                .map_err(|e| CliError::Problem(e.into()))?;
            write_prediction(&method_dir.join("prediction.csv"), &grid, &ens)?;
            write_json(
                &method_dir.join("population.json"),
                &Checkpoint::new(mode.name(), &outcome.population),
            )?;

            let best = outcome.best.genome.losses.clone();
            let k_hat = outcome.best.genome.params.extras().first().copied();
            losses.methods.push(MethodLosses::new(mode.name(), &best));
            if let (Some(k_true), Some(k_hat)) = (k_true, k_hat) {
                estimates.methods.push(MethodEstimate {
                    method: mode.name().into(),
                    k_hat,
                    k_true,
                });
            }
            progress(&format!(
                "rep {index} seed {seed} {}: total {:.6e}{}",
                mode.name(),
                best.total(),
                k_hat.map(|k| format!(" k_hat {k:.6}")).unwrap_or_default()
            ));
            methods.push(MethodSummary {
                mode,
                best,
                k_hat,
                records: outcome.records,
                adam_steps: outcome.adam_steps,
            });
        }
        write_json(&dir.join("final_losses.json"), &losses)?;
        if k_true.is_some() {
            write_json(&dir.join("estimates.json"), &estimates)?;
        }
        summaries.push(RepetitionSummary {
            index,
            seed,
            methods,
        });
    }
    Ok(summaries)
}
