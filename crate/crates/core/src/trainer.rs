//! The NSGA-PINN generational loop and its baselines.
//!
//! Per generation: rank the parents by non-domination and crowding, draw a
//! mating pool by crowded binary tournament, refine every pool member with
//! Adam to form the offspring, merge parents and offspring and keep the best
//! `N` by elitist NSGA-II survival.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adam::{train_from, AdamConfig, AdamError, AdamState};
use crate::mlp::{Mlp, ParameterVector};
use crate::nsga::{
    environmental_select, rank_and_crowd, tournament_select_indices, Individual, Label, NsgaError,
};
use crate::problems::{evaluate_objectives, ObjectiveVector, PinnProblem, ProblemError};
use crate::rng::{purpose, stream};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error("invalid run configuration: {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("generation {generation}, individual {label}: {source}")]
    Objective {
        generation: usize,
        label: Label,
        source: ProblemError,
    },
    #[error("generation {generation}, individual {label}: {source}")]
    Refinement {
        generation: usize,
        label: Label,
        source: AdamError,
    },
    #[error(transparent)]
    Nsga(#[from] NsgaError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    NsgaPinn,
    AdamOnly,
    NsgaOnly,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::NsgaPinn => "nsga_pinn",
            Mode::AdamOnly => "adam_only",
            Mode::NsgaOnly => "nsga_only",
        }
    }
}

/// Which mating-pool members receive Adam refinement.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Refine {
    /// Every pool member is refined.
    #[default]
    Pool,
    /// Only the pool member with the lowest total loss is refined; the rest
    /// pass into the offspring unchanged.
    BestOnly,
}

/// Where an offspring's optimizer state starts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerState {
    /// Continue from the parent's moment estimates.
    #[default]
    Inherit,
    /// Start from zero moments.
    Fresh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub population_size: usize,
    pub max_generations: usize,
    pub inner_adam_steps: usize,
    pub adam: AdamConfig,
    pub master_seed: u64,
    pub mode: Mode,
    pub refine: Refine,
    pub optimizer_state: OptimizerState,
    /// Standard deviation of the parameter perturbation used by `nsga_only`
    /// and to separate duplicated pool members before refinement.
    pub perturb_sigma: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            population_size: 20,
            max_generations: 20,
            inner_adam_steps: 100,
            adam: AdamConfig::default(),
            master_seed: 0,
            mode: Mode::NsgaPinn,
            refine: Refine::Pool,
            optimizer_state: OptimizerState::Inherit,
            perturb_sigma: 0.01,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |field: &'static str, reason: &str| {
            Err(TrainError::InvalidConfig {
                field,
                reason: reason.into(),
            })
        };
        if self.population_size < 2 || !self.population_size.is_multiple_of(2) {
            return bad("population_size", "must be an even integer >= 2");
        }
        if self.max_generations == 0 {
            return bad("max_generations", "must be >= 1");
        }
        if self.inner_adam_steps == 0 {
            return bad("inner_adam_steps", "must be >= 1");
        }
        if !(self.adam.lr > 0.0) {
            return bad("lr", "must be positive");
        }
        if !(0.0..1.0).contains(&self.adam.beta1) || !(0.0..1.0).contains(&self.adam.beta2) {
            return bad("beta", "beta1 and beta2 must lie in [0, 1)");
        }
        if !(self.adam.eps > 0.0) {
            return bad("eps", "must be positive");
        }
        if !(self.perturb_sigma >= 0.0) {
            return bad("perturb_sigma", "must be >= 0");
        }
        Ok(())
    }

    /// Adam steps a full `nsga_pinn` run with pool refinement consumes; the
    /// `adam_only` baseline trains one network for exactly this many.
    pub fn matched_budget(&self) -> usize {
        self.population_size * self.max_generations * self.inner_adam_steps
    }
}

/// Trainable state carried by one individual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub params: ParameterVector,
    pub adam: Option<AdamState>,
    pub losses: ObjectiveVector,
}

pub type Pinn = Individual<Member>;

/// Per-generation telemetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub min_objectives: Vec<f64>,
    pub mean_objectives: Vec<f64>,
    pub min_total: f64,
    pub survival_rate: f64,
    pub front_sizes: Vec<usize>,
    /// Adam steps consumed so far in the run.
    pub adam_steps: u64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub best: Pinn,
    pub records: Vec<GenerationRecord>,
    pub population: Vec<Pinn>,
    pub adam_steps: u64,
}

/// Maps a function over independent work items. Implementations may run
/// items concurrently but must return results in item order.
pub trait Executor: Sync {
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync;
}

/// Runs every item on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Executor for Serial {
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync,
    {
        items.iter().map(f).collect()
    }
}

/// Fraction of `survivors` that are members of `offspring`.
pub fn survival_rate(parents: &[Label], survivors: &[Label], offspring: &[Label]) -> f64 {
    let _ = parents;
    if survivors.is_empty() {
        return 0.0;
    }
    let offspring: BTreeSet<Label> = offspring.iter().copied().collect();
    let kept = survivors.iter().filter(|l| offspring.contains(l)).count();
    kept as f64 / survivors.len() as f64
}

fn perturb(params: &ParameterVector, sigma: f64, keys: &[u64]) -> ParameterVector {
    let mut out = params.clone();
    if sigma == 0.0 {
        return out;
    }
    let mut rng = stream(keys);
    for v in out.values.iter_mut() {
        let z: f64 = StandardNormal.sample(&mut rng);
        *v += sigma * z;
    }
    out
}

fn record(
    generation: usize,
    pop: &[Pinn],
    survival_rate: f64,
    adam_steps: u64,
) -> GenerationRecord {
    let m = pop[0].objectives.len();
    let mut min = vec![f64::INFINITY; m];
    let mut mean = vec![0.0; m];
    for ind in pop {
        for (k, v) in ind.objectives.iter().enumerate() {
            min[k] = min[k].min(*v);
            mean[k] += v / pop.len() as f64;
        }
    }
    let min_total = pop
        .iter()
        .map(|i| i.genome.losses.total())
        .fold(f64::INFINITY, f64::min);
    let mut scratch: Vec<Individual> = pop
        .iter()
        .map(|i| Individual::new(i.label, i.objectives.clone(), ()))
        .collect();
    let front_sizes = rank_and_crowd(&mut scratch)
        .map(|f| f.iter().map(Vec::len).collect())
        .unwrap_or_default();
    GenerationRecord {
        generation,
        min_objectives: min,
        mean_objectives: mean,
        min_total,
        survival_rate,
        front_sizes,
        adam_steps,
    }
}

fn best_of(pop: &[Pinn]) -> &Pinn {
    pop.iter()
        .min_by(|a, b| {
            a.genome
                .losses
                .total()
                .total_cmp(&b.genome.losses.total())
                .then(a.label.cmp(&b.label))
        })
        .expect("population is non-empty")
}

struct Job {
    parent: usize,
    label: Label,
    duplicate: bool,
    refine: bool,
}

/// Runs the configured method and returns the best individual, the
/// per-generation records and the final population.
pub fn run<P, E>(problem: &P, config: &RunConfig, exec: &E) -> Result<RunOutcome, TrainError>
where
    P: PinnProblem + ?Sized,
    E: Executor,
{
    run_with(problem, config, exec, |_| {})
}

/// [`run`] with a callback invoked after every generation.
pub fn run_with<P, E, F>(
    problem: &P,
    config: &RunConfig,
    exec: &E,
    mut on_record: F,
) -> Result<RunOutcome, TrainError>
where
    P: PinnProblem + ?Sized,
    E: Executor,
    F: FnMut(&GenerationRecord),
{
    config.validate()?;
    let n = config.population_size;
    let seed = config.master_seed;
    let mlp = problem.mlp();
    let extras = problem.initial_extras();

    let founders = if config.mode == Mode::AdamOnly { 1 } else { n };
    let labels: Vec<u64> = (0..founders as u64).collect();
    let init = exec.map(&labels, |&label| {
        let mut rng = stream(&[purpose::INIT, seed, label]);
        let params = mlp.init(&mut rng, &extras);
        let losses =
            evaluate_objectives(problem, &params).map_err(|source| TrainError::Objective {
                generation: 0,
                label: Label(label),
                source,
            })?;
        Ok(Individual::new(
            Label(label),
            losses.values(),
            Member {
                params,
                adam: None,
                losses,
            },
        ))
    });
    let mut pop: Vec<Pinn> = init.into_iter().collect::<Result<_, TrainError>>()?;

    if config.mode == Mode::AdamOnly {
        return run_adam_only(problem, config, pop.remove(0), on_record);
    }

    let mut next_label = n as u64;
    let mut records = Vec::with_capacity(config.max_generations);
    let mut adam_steps = 0u64;
    for generation in 1..=config.max_generations {
        rank_and_crowd(&mut pop)?;
        let mut rng = stream(&[purpose::TOURNAMENT, seed, generation as u64]);
        let pool = tournament_select_indices(&pop, n, &mut rng)?;

        let best_in_pool = pool
            .iter()
            .copied()
            .min_by(|&a, &b| {
                pop[a]
                    .genome
                    .losses
                    .total()
                    .total_cmp(&pop[b].genome.losses.total())
                    .then(pop[a].label.cmp(&pop[b].label))
            })
            .expect("pool is non-empty");
        let mut seen = BTreeSet::new();
        let jobs: Vec<Job> = pool
            .iter()
            .enumerate()
            .map(|(slot, &parent)| Job {
                parent,
                label: Label(next_label + slot as u64),
                duplicate: !seen.insert(parent),
                refine: match config.refine {
                    Refine::Pool => true,
                    Refine::BestOnly => slot == first_slot(&pool, best_in_pool),
                },
            })
            .collect();
        next_label += n as u64;
        let offspring_labels: Vec<Label> = jobs.iter().map(|j| j.label).collect();
        let refined_count = jobs.iter().filter(|j| j.refine).count() as u64;

        let parents = &pop;
        let children = exec.map(&jobs, |job| {
            make_offspring(problem, config, parents, job, generation)
        });
        let children: Vec<Pinn> = children.into_iter().collect::<Result<_, TrainError>>()?;
        if config.mode == Mode::NsgaPinn {
            adam_steps += refined_count * config.inner_adam_steps as u64;
        }

        let parent_labels: Vec<Label> = pop.iter().map(|i| i.label).collect();
        let mut combined = core::mem::take(&mut pop);
        combined.extend(children);
        let best_label = best_of(&combined).label;
        let best_copy = best_of(&combined).clone();
        let mut survivors = environmental_select(combined, n)?;
        if !survivors.iter().any(|s| s.label == best_label) {
            // keep the lowest total loss in the population; it displaces the
            // last (least crowded) member of the truncated front
            *survivors.last_mut().expect("n >= 2") = best_copy;
        }
        let survivor_labels: Vec<Label> = survivors.iter().map(|i| i.label).collect();
        let rate = survival_rate(&parent_labels, &survivor_labels, &offspring_labels);
        pop = survivors;
        let rec = record(generation, &pop, rate, adam_steps);
        on_record(&rec);
        records.push(rec);
    }
    let best = best_of(&pop).clone();
    Ok(RunOutcome {
        best,
        records,
        population: pop,
        adam_steps,
    })
}

fn first_slot(pool: &[usize], parent: usize) -> usize {
    pool.iter()
        .position(|&p| p == parent)
        .expect("parent is in pool")
}

fn make_offspring<P: PinnProblem + ?Sized>(
    problem: &P,
    config: &RunConfig,
    parents: &[Pinn],
    job: &Job,
    generation: usize,
) -> Result<Pinn, TrainError> {
    let parent = &parents[job.parent];
    let keys_for = |p: u64| [p, config.master_seed, job.label.0, generation as u64];
    let objective_err = |source| TrainError::Objective {
        generation,
        label: job.label,
        source,
    };
    let member = match config.mode {
        Mode::NsgaOnly => {
            let params = perturb(
                &parent.genome.params,
                config.perturb_sigma,
                &keys_for(purpose::PERTURB),
            );
            let losses = evaluate_objectives(problem, &params).map_err(objective_err)?;
            Member {
                params,
                adam: None,
                losses,
            }
        }
        Mode::NsgaPinn if job.refine => {
            let params = if job.duplicate {
                perturb(
                    &parent.genome.params,
                    config.perturb_sigma,
                    &keys_for(purpose::JITTER),
                )
            } else {
                parent.genome.params.clone()
            };
            let state = match (config.optimizer_state, &parent.genome.adam) {
                (OptimizerState::Inherit, Some(s)) => s.clone(),
                _ => AdamState::new(params.len(), config.adam),
            };
            let out =
                train_from(problem, &params, state, config.inner_adam_steps).map_err(|source| {
                    TrainError::Refinement {
                        generation,
                        label: job.label,
                        source,
                    }
                })?;
            Member {
                params: out.params,
                adam: Some(out.state),
                losses: out.objectives,
            }
        }
        Mode::NsgaPinn => parent.genome.clone(),
        Mode::AdamOnly => unreachable!("adam_only has no offspring"),
    };
    Ok(Individual::new(job.label, member.losses.values(), member))
}

fn run_adam_only<P, F>(
    problem: &P,
    config: &RunConfig,
    mut ind: Pinn,
    mut on_record: F,
) -> Result<RunOutcome, TrainError>
where
    P: PinnProblem + ?Sized,
    F: FnMut(&GenerationRecord),
{
    let chunk = config.population_size * config.inner_adam_steps;
    let mut state = AdamState::new(ind.genome.params.len(), config.adam);
    let mut records = Vec::with_capacity(config.max_generations);
    let mut adam_steps = 0u64;
    for generation in 1..=config.max_generations {
        let out = train_from(problem, &ind.genome.params, state, chunk).map_err(|source| {
            TrainError::Refinement {
                generation,
                label: ind.label,
                source,
            }
        })?;
        state = out.state;
        adam_steps += chunk as u64;
        ind.objectives = out.objectives.values();
        ind.genome = Member {
            params: out.params,
            adam: Some(state.clone()),
            losses: out.objectives,
        };
        let rec = record(generation, core::slice::from_ref(&ind), 0.0, adam_steps);
        on_record(&rec);
        records.push(rec);
    }
    Ok(RunOutcome {
        best: ind.clone(),
        records,
        population: vec![ind],
        adam_steps,
    })
}

/// Pointwise ensemble statistics: mean and empirical 2.5 / 97.5 percentiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsemblePrediction {
    pub output_dim: usize,
    /// Row-major `points x output_dim`.
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Linear-interpolation percentile of sorted data, `q` in `[0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(n - 1);
    let w = pos - lo as f64;
    sorted[lo] + w * (sorted[hi] - sorted[lo])
}

/// Builds an ensemble prediction from per-member outputs, each row-major
/// `points x output_dim`.
pub fn ensemble_from_outputs(outputs: &[Vec<f64>], output_dim: usize) -> EnsemblePrediction {
    let len = outputs.first().map_or(0, Vec::len);
    let mut mean = vec![0.0; len];
    let mut lower = vec![0.0; len];
    let mut upper = vec![0.0; len];
    let mut column = Vec::with_capacity(outputs.len());
    for k in 0..len {
        column.clear();
        column.extend(outputs.iter().map(|o| o[k]));
        let m = column.iter().sum::<f64>() / column.len() as f64;
        column.sort_by(f64::total_cmp);
        let lo = percentile(&column, 0.025);
        let hi = percentile(&column, 0.975);
        // clamp guards against rounding when every member agrees
        mean[k] = m.clamp(lo, hi);
        lower[k] = lo;
        upper[k] = hi;
    }
    EnsemblePrediction {
        output_dim,
        mean,
        lower,
        upper,
    }
}

/// Evaluates every member at the row-major `inputs` and summarizes.
pub fn ensemble_predict(
    mlp: &Mlp,
    members: &[&ParameterVector],
    inputs: &[f64],
) -> Result<EnsemblePrediction, crate::mlp::AutodiffError> {
    let d = mlp.input_dim();
    let outputs = members
        .iter()
        .map(|p| {
            let mut out = Vec::with_capacity(inputs.len() / d * mlp.output_dim());
            for x in inputs.chunks_exact(d) {
                out.extend(mlp.forward(p, x)?);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ensemble_from_outputs(&outputs, mlp.output_dim()))
}
