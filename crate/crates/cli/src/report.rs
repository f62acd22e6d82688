//! Aggregates the repetitions of a finished run.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::experiment::rep_dir;
use crate::output::{fmt_real, read_generations, read_json, write_json, FinalLosses};

/// Per-generation means over repetitions for one method.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationMeans {
    pub method: String,
    pub gen: Vec<usize>,
    pub mean_survival_rate: Vec<f64>,
    pub mean_min_total: Vec<f64>,
    pub repetitions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossSummary {
    pub method: String,
    pub repetitions: usize,
    /// Mean of every loss key over repetitions.
    pub mean: BTreeMap<String, f64>,
    /// `total` of each repetition in order.
    pub totals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub experiment: String,
    pub methods: Vec<LossSummary>,
}

/// Reads `manifest.json` and every `rep_NNN` under `dir`.
pub fn aggregate(dir: &Path) -> Result<(Vec<GenerationMeans>, Report), CliError> {
    let config: ExperimentConfig = read_json(&dir.join("manifest.json"))?;
    let mut means = Vec::with_capacity(config.modes.len());
    for mode in &config.modes {
        let mut acc: Vec<(f64, f64)> = Vec::new();
        let mut gens = Vec::new();
        for rep in 0..config.repetitions {
            let rows =
                read_generations(&rep_dir(dir, rep).join(mode.name()).join("generations.csv"))?;
            if acc.is_empty() {
                acc = vec![(0.0, 0.0); rows.len()];
                gens = rows.iter().map(|r| r.gen).collect();
            }
            for (a, r) in acc.iter_mut().zip(&rows) {
                a.0 += r.survival_rate;
                a.1 += r.min_total;
            }
        }
        let n = config.repetitions as f64;
        means.push(GenerationMeans {
            method: mode.name().into(),
            gen: gens,
            mean_survival_rate: acc.iter().map(|a| a.0 / n).collect(),
            mean_min_total: acc.iter().map(|a| a.1 / n).collect(),
            repetitions: config.repetitions,
        });
    }

    let mut by_method: BTreeMap<String, Vec<BTreeMap<String, f64>>> = BTreeMap::new();
    for rep in 0..config.repetitions {
        let f: FinalLosses = read_json(&rep_dir(dir, rep).join("final_losses.json"))?;
        for m in f.methods {
            by_method.entry(m.method).or_default().push(m.losses);
        }
    }
    let methods = config
        .modes
        .iter()
        .filter_map(|mode| by_method.get(mode.name()).map(|reps| (mode.name(), reps)))
        .map(|(name, reps)| {
            let mut mean: BTreeMap<String, f64> = BTreeMap::new();
            for losses in reps {
                for (k, v) in losses {
                    *mean.entry(k.clone()).or_default() += v / reps.len() as f64;
                }
            }
            LossSummary {
                method: name.into(),
                repetitions: reps.len(),
                mean,
                totals: reps.iter().map(|l| l["total"]).collect(),
            }
        })
        .collect();
    let experiment = serde_json::to_value(config.experiment)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    Ok((
        means,
        Report {
            experiment,
            methods,
        },
    ))
}

/// Writes `survival_rate.csv` and `summary.json` into `dir`.
pub fn write_report(dir: &Path) -> Result<(Vec<GenerationMeans>, Report), CliError> {
    let (means, report) = aggregate(dir)?;
    let path = dir.join("survival_rate.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Format {
        path: path.clone(),
        message: e.to_string(),
    })?;
    let fail = |e: csv::Error| CliError::Format {
        path: path.clone(),
        message: e.to_string(),
    };
    w.write_record([
        "method",
        "gen",
        "mean_survival_rate",
        "mean_min_total",
        "repetitions",
    ])
    .map_err(fail)?;
    for m in &means {
        for (i, g) in m.gen.iter().enumerate() {
            w.write_record([
                m.method.clone(),
                g.to_string(),
                fmt_real(m.mean_survival_rate[i]),
                fmt_real(m.mean_min_total[i]),
                m.repetitions.to_string(),
            ])
            .map_err(fail)?;
        }
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    write_json(&dir.join("summary.json"), &report)?;
    Ok((means, report))
}
