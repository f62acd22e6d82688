//! Module invariants as property tests. Each property runs `CASES` random
//! cases from a fixed-seed runner and reports the first failure.

use std::collections::BTreeSet;
use std::path::Path;

use nsga_pinn::config::{preset, Experiment, ExperimentConfig, ProblemSettings};
use nsga_pinn::experiment::run_experiment;
use nsga_pinn::oracle::{brute_force_environmental, brute_force_ranks, loss_oracle};
use nsga_pinn::output::{read_generations, write_generations, GenerationRow};
use nsga_pinn::Threads;
use nsga_pinn_core::adam::{adam_step, train, train_from};
use nsga_pinn_core::nsga::{
    crowded_winner, dominates, environmental_select, non_dominated_sort, rank_and_crowd,
    tournament_select_indices,
};
use nsga_pinn_core::problems::{evaluate_objectives, PinnProblem};
use nsga_pinn_core::trainer::{run, Serial};
use nsga_pinn_core::{
    AdamConfig, AdamState, GenerationRecord, Individual, Mlp, MlpConfig, Mode, ParameterVector,
    ProblemSpec, Refine, RunConfig,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use super::*;

pub const CASES: u32 = 100;

pub type Property = fn() -> Result<(), String>;

/// Every property with its name, in module order.
pub const ALL: &[(&str, Property)] = &[
    ("autodiff: forward is deterministic", autodiff_determinism),
    (
        "autodiff: jet value equals forward",
        jet_value_matches_forward,
    ),
    (
        "autodiff: loss gradients match finite differences",
        gradient_matches_fd,
    ),
    ("autodiff: output layer is linear", output_layer_linearity),
    ("autodiff: flatten/unflatten round-trip", flatten_round_trip),
    (
        "problems: components are non-negative",
        objectives_non_negative,
    ),
    (
        "problems: losses match the brute-force oracle",
        loss_oracle_equivalence,
    ),
    (
        "problems: sampling is seed-deterministic",
        sampling_determinism,
    ),
    (
        "problems: zero network closed form",
        zero_network_closed_form,
    ),
    ("adam: step bounded by lr", adam_step_bound),
    ("adam: training is deterministic", adam_determinism),
    (
        "adam: state serde round-trip resumes exactly",
        adam_state_round_trip,
    ),
    (
        "nsga: dominance is a strict partial order",
        dominance_strict_partial_order,
    ),
    ("nsga: rank-1 members are undominated", rank_one_undominated),
    ("nsga: fronts partition the population", fronts_partition),
    (
        "nsga: tournament never prefers a dominated member",
        tournament_respects_dominance,
    ),
    (
        "nsga: environmental selection keeps the first front",
        environmental_elitism,
    ),
    (
        "nsga: fronts invariant under objective scaling",
        scaling_invariance,
    ),
    (
        "nsga: sort and selection match brute force",
        nsga_oracle_equivalence,
    ),
    ("trainer: best total loss never increases", trainer_elitism),
    ("trainer: adam budget accounting", trainer_budget),
    ("trainer: population size stays N", trainer_population_size),
    (
        "trainer: survivors trace to parents or offspring",
        trainer_label_lineage,
    ),
    (
        "trainer: serial and threaded runs agree",
        trainer_parallel_determinism,
    ),
    (
        "cli: outputs regenerate from config and seed",
        cli_output_determinism,
    ),
    (
        "cli: manifest alone reproduces the run",
        cli_manifest_closure,
    ),
    (
        "cli: generations.csv round-trips exactly",
        cli_generations_round_trip,
    ),
];

fn check<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner =
        TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn small_mlp() -> impl Strategy<Value = (MlpConfig, u64)> {
    (
        1usize..4,
        prop::collection::vec(1usize..7, 1..4),
        1usize..4,
        any::<u64>(),
    )
        .prop_map(|(i, h, o, seed)| (MlpConfig::new(i, h, o), seed))
}

fn init(config: &MlpConfig, seed: u64) -> (Mlp, ParameterVector) {
    let mlp = Mlp::new(config.clone()).expect("valid config");
    let mut p = mlp.init(&mut nsga_pinn_core::rng::stream(&[seed]), &[]);
    let mut rng = nsga_pinn_core::rng::stream(&[seed, 1]);
    for v in p.values.iter_mut() {
        *v += rand::Rng::random_range(&mut rng, -0.2..0.2);
    }
    (mlp, p)
}

fn inputs(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, dim)
}

// ---- autodiff ----

pub fn autodiff_determinism() -> Result<(), String> {
    check(
        CASES,
        small_mlp().prop_flat_map(|c| (Just(c.clone()), inputs(c.0.input_dim))),
        |((cfg, seed), x)| {
            let (mlp, p) = init(&cfg, seed);
            let a = mlp.forward(&p, &x).unwrap();
            let b = mlp.forward(&p, &x).unwrap();
            prop_assert_eq!(
                a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                b.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
            Ok(())
        },
    )
}

pub fn jet_value_matches_forward() -> Result<(), String> {
    check(
        CASES,
        small_mlp().prop_flat_map(|c| (Just(c.clone()), inputs(c.0.input_dim))),
        |((cfg, seed), x)| {
            let (mlp, p) = init(&cfg, seed);
            let plain = mlp.forward(&p, &x).unwrap();
            for s in 0..x.len() {
                let jets = mlp.forward_jet(&p, &x, s).unwrap();
                let values: Vec<f64> = jets.iter().map(|j| j.value).collect();
                prop_assert_eq!(&values, &plain);
            }
            Ok(())
        },
    )
}

pub fn gradient_matches_fd() -> Result<(), String> {
    check(
        CASES,
        (any::<bool>(), any::<u64>(), 0.3f64..2.0),
        |(burgers, seed, scale)| {
            let problem = tiny_problem(burgers, seed % 1000);
            let params = random_params(&problem, seed, scale);
            let err = gradient_error(&problem, &params);
            prop_assert!(err < 1e-5, "max relative gradient error {err:e}");
            Ok(())
        },
    )
}

pub fn output_layer_linearity() -> Result<(), String> {
    check(
        CASES,
        (small_mlp(), -3.0f64..3.0)
            .prop_flat_map(|(c, k)| (Just(c.clone()), Just(k), inputs(c.0.input_dim))),
        |((cfg, seed), c, x)| {
            let (mlp, p) = init(&cfg, seed);
            let mut layers = mlp.unflatten(&p).unwrap();
            let last = layers.last_mut().unwrap();
            last.bias.iter_mut().for_each(|b| *b = 0.0);
            let base = mlp.flatten(&layers, &[]).unwrap();
            let last = layers.last_mut().unwrap();
            last.weights.iter_mut().for_each(|w| *w *= c);
            let scaled = mlp.flatten(&layers, &[]).unwrap();
            let y0 = mlp.forward(&base, &x).unwrap();
            let y1 = mlp.forward(&scaled, &x).unwrap();
            for (a, b) in y0.iter().zip(&y1) {
                prop_assert!(
                    (c * a - b).abs() <= 1e-12 * (1.0 + b.abs()),
                    "{} vs {}",
                    c * a,
                    b
                );
            }
            Ok(())
        },
    )
}

pub fn flatten_round_trip() -> Result<(), String> {
    check(
        CASES,
        (small_mlp(), prop::collection::vec(-5.0f64..5.0, 0..3))
            .prop_flat_map(|(c, e)| (Just(c.clone()), Just(e), inputs(c.0.input_dim))),
        |((cfg, seed), extras, x)| {
            let (mlp, mut p) = init(&cfg, seed);
            p.values.extend_from_slice(&extras);
            p.extra_scalars = extras.len();
            let layers = mlp.unflatten(&p).unwrap();
            let back = mlp.flatten(&layers, &extras).unwrap();
            prop_assert_eq!(&back, &p);
            prop_assert_eq!(
                mlp.forward(&back, &x).unwrap(),
                mlp.forward(&p, &x).unwrap()
            );
            prop_assert_eq!(p.len(), cfg.parameter_count() + extras.len());
            Ok(())
        },
    )
}

// ---- problems ----

pub fn objectives_non_negative() -> Result<(), String> {
    check(
        CASES,
        (any::<bool>(), any::<u64>(), 0.01f64..5.0),
        |(burgers, seed, scale)| {
            let problem = tiny_problem(burgers, seed % 97);
            let params = random_params(&problem, seed, scale);
            let obj = evaluate_objectives(&problem, &params).unwrap();
            prop_assert_eq!(obj.len(), 3);
            for c in &obj.0 {
                prop_assert!(
                    c.value >= 0.0 && c.value.is_finite(),
                    "{} = {}",
                    c.name,
                    c.value
                );
            }
            Ok(())
        },
    )
}

pub fn loss_oracle_equivalence() -> Result<(), String> {
    check(
        CASES,
        (any::<bool>(), any::<u64>(), 0.3f64..2.0),
        |(burgers, seed, scale)| {
            let problem = tiny_problem(burgers, seed % 1000);
            let params = random_params(&problem, seed, scale);
            let fast = evaluate_objectives(&problem, &params).unwrap().values();
            let slow = loss_oracle(&problem, &params);
            for (a, b) in fast.iter().zip(slow) {
                prop_assert!(
                    rel_err(*a, b, 1e-12) < 1e-4,
                    "implementation {a} vs oracle {b}"
                );
            }
            Ok(())
        },
    )
}

pub fn sampling_determinism() -> Result<(), String> {
    check(CASES, (any::<bool>(), any::<u64>()), |(burgers, seed)| {
        match (tiny_problem(burgers, seed), tiny_problem(burgers, seed)) {
            (ProblemSpec::Pendulum(a), ProblemSpec::Pendulum(b)) => {
                prop_assert_eq!(a.collocation(), b.collocation());
                prop_assert_eq!(a.ic_targets(), b.ic_targets());
                prop_assert_eq!(a.data(), b.data());
            }
            (ProblemSpec::Burgers(a), ProblemSpec::Burgers(b)) => {
                prop_assert_eq!(a.collocation(), b.collocation());
                prop_assert_eq!(a.boundary(), b.boundary());
                prop_assert_eq!(a.initial_targets(), b.initial_targets());
            }
            _ => unreachable!(),
        }
        Ok(())
    })
}

pub fn zero_network_closed_form() -> Result<(), String> {
    check(
        CASES,
        (any::<bool>(), any::<u64>(), 0.0f64..3.0),
        |(burgers, seed, k)| {
            let problem = tiny_problem(burgers, seed);
            let mut params =
                ParameterVector::zeros(problem.mlp().config(), problem.initial_extras().len());
            params.extras_mut().iter_mut().for_each(|e| *e = k);
            let obj = evaluate_objectives(&problem, &params).unwrap().values();
            let mean_sq = |rows: &[f64], w: usize| {
                rows.chunks(w)
                    .map(|r| r.iter().map(|v| v * v).sum::<f64>())
                    .sum::<f64>()
                    / (rows.len() / w) as f64
            };
            let want = match &problem {
                ProblemSpec::Pendulum(p) => [0.0, mean_sq(p.ic_targets(), 2), mean_sq(p.data(), 2)],
                ProblemSpec::Burgers(b) => [0.0, 0.0, mean_sq(b.initial_targets(), 1)],
            };
            prop_assert_eq!(obj[0], 0.0);
            for (a, b) in obj.iter().zip(want) {
                prop_assert!((a - b).abs() <= 1e-14 * b.abs(), "{a} vs {b}");
            }
            Ok(())
        },
    )
}

// ---- adam ----

pub fn adam_step_bound() -> Result<(), String> {
    let strategy = (
        1e-5f64..1e-1,
        prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 4), 1..40),
        prop::collection::vec(prop::collection::vec(any::<bool>(), 4), 40),
        prop::collection::vec(1e-4f64..1e2, 4),
    );
    check(CASES, strategy, |(lr, arbitrary, signs, mags)| {
        let cfg = AdamConfig::with_lr(lr);
        // Worst case over arbitrary gradients: lr (1 - b1) / sqrt(1 - b2).
        let worst = lr * (1.0 - cfg.beta1) / (1.0 - cfg.beta2).sqrt() * (1.0 + 1e-9);
        let mut state = AdamState::new(4, cfg);
        let mut theta = vec![0.0; 4];
        for g in &arbitrary {
            let (s, next) = adam_step(&state, &theta, g).unwrap();
            for (a, b) in theta.iter().zip(&next) {
                prop_assert!((a - b).abs() <= worst, "step {} > {worst}", (a - b).abs());
            }
            state = s;
            theta = next;
        }
        // Constant magnitude per coordinate: every step is at most lr.
        let mut state = AdamState::new(4, cfg);
        let mut theta = vec![0.0; 4];
        for row in &signs {
            let g: Vec<f64> = row
                .iter()
                .zip(&mags)
                .map(|(&s, &m)| if s { m } else { -m })
                .collect();
            let (s, next) = adam_step(&state, &theta, &g).unwrap();
            for (a, b) in theta.iter().zip(&next) {
                prop_assert!(
                    (a - b).abs() <= lr * (1.0 + 1e-9),
                    "step {} > lr {lr}",
                    (a - b).abs()
                );
            }
            state = s;
            theta = next;
        }
        Ok(())
    })
}

pub fn adam_determinism() -> Result<(), String> {
    check(
        CASES,
        (any::<bool>(), any::<u64>(), 1usize..6),
        |(burgers, seed, steps)| {
            let problem = tiny_problem(burgers, seed % 50);
            let params = random_params(&problem, seed, 1.0);
            let a = train(&problem, &params, steps, AdamConfig::with_lr(1e-2)).unwrap();
            let b = train(&problem, &params, steps, AdamConfig::with_lr(1e-2)).unwrap();
            prop_assert_eq!(a, b);
            Ok(())
        },
    )
}

pub fn adam_state_round_trip() -> Result<(), String> {
    check(
        CASES,
        (any::<bool>(), any::<u64>(), 1usize..5, 1usize..5),
        |(burgers, seed, first, second)| {
            let problem = tiny_problem(burgers, seed % 50);
            let params = random_params(&problem, seed, 1.0);
            let cfg = AdamConfig::with_lr(3e-3);
            let whole = train(&problem, &params, first + second, cfg).unwrap();
            let half = train(&problem, &params, first, cfg).unwrap();
            let text = serde_json::to_string(&half.state).unwrap();
            let restored: AdamState = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(&restored, &half.state);
            let rest = train_from(&problem, &half.params, restored, second).unwrap();
            prop_assert_eq!(rest.params, whole.params);
            prop_assert_eq!(&rest.history[..], &whole.history[first..]);
            Ok(())
        },
    )
}

// ---- nsga ----

fn objective_value() -> impl Strategy<Value = f64> {
    prop_oneof![(0u8..4).prop_map(f64::from), -100.0f64..100.0]
}

fn population(min: usize, max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..=4, min..=max).prop_flat_map(|(m, n)| {
        prop::collection::vec(prop::collection::vec(objective_value(), m), n)
    })
}

fn bare(objs: &[Vec<f64>]) -> Vec<Individual> {
    objs.iter()
        .enumerate()
        .map(|(i, o)| Individual::bare(i as u64, o.clone()))
        .collect()
}

pub fn dominance_strict_partial_order() -> Result<(), String> {
    check(CASES, population(3, 3), |v| {
        let d = |a: usize, b: usize| dominates(&v[a], &v[b]).unwrap();
        for a in 0..3 {
            prop_assert!(!d(a, a));
            for b in 0..3 {
                prop_assert!(!(d(a, b) && d(b, a)));
                for c in 0..3 {
                    if d(a, b) && d(b, c) {
                        prop_assert!(d(a, c));
                    }
                }
            }
        }
        Ok(())
    })
}

pub fn rank_one_undominated() -> Result<(), String> {
    check(CASES, population(1, 40), |objs| {
        let mut pop = bare(&objs);
        non_dominated_sort(&mut pop).unwrap();
        for p in pop.iter().filter(|p| p.rank == Some(1)) {
            prop_assert!(objs.iter().all(|q| !dominates(q, &p.objectives).unwrap()));
        }
        Ok(())
    })
}

pub fn fronts_partition() -> Result<(), String> {
    check(CASES, population(1, 40), |objs| {
        let mut pop = bare(&objs);
        let part = non_dominated_sort(&mut pop).unwrap();
        let mut seen = BTreeSet::new();
        for front in &part.fronts {
            prop_assert!(!front.is_empty());
            for l in front {
                prop_assert!(seen.insert(l.0), "label {} twice", l.0);
            }
        }
        prop_assert_eq!(seen.len(), objs.len());
        Ok(())
    })
}

pub fn tournament_respects_dominance() -> Result<(), String> {
    check(
        CASES,
        (population(2, 30), any::<u64>()),
        |(mut objs, seed)| {
            // append a member dominated by every other: it can never win a pair
            let m = objs[0].len();
            objs.push(vec![1e6; m]);
            let worst = objs.len() - 1;
            let mut pop = bare(&objs);
            rank_and_crowd(&mut pop).unwrap();
            for a in 0..pop.len() {
                for b in 0..pop.len() {
                    if dominates(&objs[a], &objs[b]).unwrap() {
                        prop_assert_eq!(crowded_winner(&pop[a], &pop[b]).unwrap(), Some(true));
                    }
                }
            }
            let mut rng = nsga_pinn_core::rng::stream(&[seed]);
            let pool = tournament_select_indices(&pop, pop.len(), &mut rng).unwrap();
            prop_assert!(!pool.contains(&worst));
            Ok(())
        },
    )
}

pub fn environmental_elitism() -> Result<(), String> {
    check(
        CASES,
        population(2, 32).prop_filter("even", |p| p.len() % 2 == 0),
        |objs| {
            let n = objs.len() / 2;
            let mut pop = bare(&objs);
            let part = non_dominated_sort(&mut pop).unwrap();
            let survivors = environmental_select(bare(&objs), n).unwrap();
            prop_assert_eq!(survivors.len(), n);
            if part.fronts[0].len() <= n {
                let kept: BTreeSet<u64> = survivors.iter().map(|s| s.label.0).collect();
                for l in &part.fronts[0] {
                    prop_assert!(kept.contains(&l.0));
                }
            }
            Ok(())
        },
    )
}

pub fn scaling_invariance() -> Result<(), String> {
    check(
        CASES,
        (
            population(1, 30),
            1e-3f64..1e3,
            any::<prop::sample::Index>(),
        ),
        |(objs, c, k)| {
            let k = k.index(objs[0].len());
            let scaled: Vec<Vec<f64>> = objs
                .iter()
                .map(|o| {
                    let mut o = o.clone();
                    o[k] *= c;
                    o
                })
                .collect();
            let a = non_dominated_sort(&mut bare(&objs)).unwrap();
            let b = non_dominated_sort(&mut bare(&scaled)).unwrap();
            let sets = |p: &nsga_pinn_core::FrontPartition| {
                p.fronts
                    .iter()
                    .map(|f| f.iter().map(|l| l.0).collect::<BTreeSet<_>>())
                    .collect::<Vec<_>>()
            };
            prop_assert_eq!(sets(&a), sets(&b));
            Ok(())
        },
    )
}

/// Ranks and survivors of one population against the brute-force oracle.
pub fn nsga_matches_oracle(objs: &[Vec<f64>]) -> Result<(), String> {
    let mut pop = bare(objs);
    non_dominated_sort(&mut pop).map_err(|e| e.to_string())?;
    let ranks: Vec<usize> = pop.iter().map(|p| p.rank.unwrap_or(0)).collect();
    let want = brute_force_ranks(objs);
    if ranks != want {
        return Err(format!("ranks {ranks:?} vs oracle {want:?}"));
    }
    if objs.len().is_multiple_of(2) {
        let n = objs.len() / 2;
        let labels: Vec<u64> = (0..objs.len() as u64).collect();
        let mut got: Vec<u64> = environmental_select(bare(objs), n)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|s| s.label.0)
            .collect();
        got.sort_unstable();
        let want = brute_force_environmental(objs, &labels, n);
        if got != want {
            return Err(format!("survivors {got:?} vs oracle {want:?}"));
        }
    }
    Ok(())
}

pub fn nsga_oracle_equivalence() -> Result<(), String> {
    check(CASES, population(4, 64), |objs| {
        nsga_matches_oracle(&objs).map_err(TestCaseError::fail)
    })
}

// ---- trainer ----

fn small_run() -> impl Strategy<Value = (bool, RunConfig)> {
    (
        any::<bool>(),
        1usize..4,
        1usize..4,
        1usize..3,
        any::<u64>(),
        any::<bool>(),
    )
        .prop_map(|(burgers, half_n, gens, inner, seed, best_only)| {
            let cfg = RunConfig {
                population_size: 2 * half_n,
                max_generations: gens,
                inner_adam_steps: inner,
                adam: AdamConfig::with_lr(1e-2),
                master_seed: seed,
                refine: if best_only {
                    Refine::BestOnly
                } else {
                    Refine::Pool
                },
                ..RunConfig::default()
            };
            (burgers, cfg)
        })
}

pub fn trainer_elitism() -> Result<(), String> {
    check(CASES, small_run(), |(burgers, cfg)| {
        let out = run(&tiny_problem(burgers, 3), &cfg, &Serial).unwrap();
        for w in out.records.windows(2) {
            prop_assert!(
                w[1].min_total <= w[0].min_total,
                "{} > {}",
                w[1].min_total,
                w[0].min_total
            );
        }
        Ok(())
    })
}

pub fn trainer_budget() -> Result<(), String> {
    check(CASES, small_run(), |(burgers, cfg)| {
        let problem = tiny_problem(burgers, 3);
        let out = run(&problem, &cfg, &Serial).unwrap();
        let per_gen = match cfg.refine {
            Refine::Pool => cfg.population_size,
            Refine::BestOnly => 1,
        } * cfg.inner_adam_steps;
        for (g, r) in out.records.iter().enumerate() {
            prop_assert_eq!(r.adam_steps, ((g + 1) * per_gen) as u64);
        }
        let base = RunConfig {
            mode: Mode::AdamOnly,
            ..cfg.clone()
        };
        let adam = run(&problem, &base, &Serial).unwrap();
        prop_assert_eq!(adam.adam_steps, cfg.matched_budget() as u64);
        Ok(())
    })
}

pub fn trainer_population_size() -> Result<(), String> {
    check(CASES, small_run(), |(burgers, cfg)| {
        let out = run(&tiny_problem(burgers, 3), &cfg, &Serial).unwrap();
        prop_assert_eq!(out.population.len(), cfg.population_size);
        for r in &out.records {
            prop_assert_eq!(r.front_sizes.iter().sum::<usize>(), cfg.population_size);
        }
        Ok(())
    })
}

pub fn trainer_label_lineage() -> Result<(), String> {
    check(CASES, small_run(), |(burgers, cfg)| {
        let problem = tiny_problem(burgers, 3);
        let n = cfg.population_size as u64;
        let g = cfg.max_generations as u64;
        let before: BTreeSet<u64> = if g == 1 {
            (0..n).collect()
        } else {
            let prev = RunConfig {
                max_generations: cfg.max_generations - 1,
                ..cfg.clone()
            };
            run(&problem, &prev, &Serial)
                .unwrap()
                .population
                .iter()
                .map(|i| i.label.0)
                .collect()
        };
        let offspring = n * g..n * (g + 1);
        let out = run(&problem, &cfg, &Serial).unwrap();
        let mut seen = BTreeSet::new();
        for ind in &out.population {
            let l = ind.label.0;
            prop_assert!(seen.insert(l), "label {l} twice");
            prop_assert!(
                before.contains(&l) || offspring.contains(&l),
                "label {l} has no origin"
            );
        }
        Ok(())
    })
}

pub fn trainer_parallel_determinism() -> Result<(), String> {
    check(
        CASES,
        (small_run(), 2usize..5),
        |((burgers, cfg), workers)| {
            let problem = tiny_problem(burgers, 3);
            let a = run(&problem, &cfg, &Serial).unwrap();
            let b = run(&problem, &cfg, &Threads::new(workers)).unwrap();
            prop_assert_eq!(a.records, b.records);
            let pa: Vec<_> = a
                .population
                .iter()
                .map(|i| (i.label, i.genome.params.clone()))
                .collect();
            let pb: Vec<_> = b
                .population
                .iter()
                .map(|i| (i.label, i.genome.params.clone()))
                .collect();
            prop_assert_eq!(pa, pb);
            Ok(())
        },
    )
}

// ---- cli ----

/// A fast configuration of `experiment` writing to `dir`.
pub fn tiny_experiment(experiment: Experiment, dir: &Path) -> ExperimentConfig {
    let mut c = preset(experiment);
    c.output_dir = dir.display().to_string();
    c.repetitions = 2;
    c.run.population_size = 4;
    c.run.max_generations = 2;
    c.run.inner_adam_steps = 2;
    c.problem = match c.problem {
        ProblemSettings::Pendulum(p) => ProblemSettings::Pendulum(PendulumSettings {
            noise: p.noise,
            ..tiny_pendulum_settings(p.seed)
        }),
        ProblemSettings::Burgers(b) => ProblemSettings::Burgers(BurgersSettings {
            noise: b.noise,
            ..tiny_burgers_settings(b.seed)
        }),
    };
    c
}

/// Every file under `dir` with its bytes, by relative path.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        let mut entries: Vec<_> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().display().to_string();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out
}

fn experiments() -> impl Strategy<Value = Experiment> {
    prop::sample::select(Experiment::ALL.to_vec())
}

pub fn cli_output_determinism() -> Result<(), String> {
    check(
        CASES,
        (experiments(), any::<u64>(), 1usize..3),
        |(exp, seed, workers)| {
            let tmp = tempfile::tempdir().unwrap();
            let mut a = tiny_experiment(exp, &tmp.path().join("a"));
            a.run.master_seed = seed;
            let mut b = a.clone();
            b.output_dir = tmp.path().join("b").display().to_string();
            run_experiment(&a, &Serial, |_| {}).unwrap();
            run_experiment(&b, &Threads::new(workers), |_| {}).unwrap();
            let sa = snapshot(Path::new(&a.output_dir));
            let mut sb = snapshot(Path::new(&b.output_dir));
            // manifests differ only in output_dir
            let manifest = |s: &mut Vec<(String, Vec<u8>)>| s.retain(|(n, _)| n != "manifest.json");
            let mut sa = sa;
            manifest(&mut sa);
            manifest(&mut sb);
            prop_assert!(!sa.is_empty());
            prop_assert!(sa == sb, "outputs differ");
            Ok(())
        },
    )
}

pub fn cli_manifest_closure() -> Result<(), String> {
    check(CASES, (experiments(), any::<u64>()), |(exp, seed)| {
        let tmp = tempfile::tempdir().unwrap();
        let mut first = tiny_experiment(exp, &tmp.path().join("first"));
        first.run.master_seed = seed;
        run_experiment(&first, &Serial, |_| {}).unwrap();
        let manifest = Path::new(&first.output_dir).join("manifest.json");
        let again = nsga_pinn::config::load(&manifest, &Default::default()).unwrap();
        prop_assert_eq!(&again, &first.with_explicit_seeds());
        let before = snapshot(Path::new(&first.output_dir));
        std::fs::remove_dir_all(&first.output_dir).unwrap();
        run_experiment(&again, &Serial, |_| {}).unwrap();
        prop_assert!(
            before == snapshot(Path::new(&first.output_dir)),
            "re-run differs"
        );
        Ok(())
    })
}

fn real() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        0.0f64..1.0,
        Just(f64::MIN_POSITIVE),
        Just(f64::MAX),
        Just(5e-324),
    ]
}

pub fn cli_generations_round_trip() -> Result<(), String> {
    let record = (
        1usize..1000,
        prop::collection::vec(real(), 3),
        real(),
        real(),
        0usize..100,
    )
        .prop_map(
            |(generation, min_objectives, min_total, survival_rate, f1)| GenerationRecord {
                generation,
                min_objectives,
                mean_objectives: vec![0.0; 3],
                min_total,
                survival_rate,
                front_sizes: vec![f1],
                adam_steps: 0,
            },
        );
    check(CASES, prop::collection::vec(record, 0..20), |records| {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("generations.csv");
        write_generations(&path, &records).unwrap();
        let rows = read_generations(&path).unwrap();
        let want: Vec<GenerationRow> = records.iter().map(GenerationRow::from).collect();
        prop_assert_eq!(rows, want);
        Ok(())
    })
}
