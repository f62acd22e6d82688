//! Result files. Reals in CSV are written with 17 significant digits;
//! JSON uses the shortest representation that parses back to the same
//! value. Both round-trip every `f64` exactly.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nsga_pinn_core::problems::PredictionGrid;
use nsga_pinn_core::trainer::{EnsemblePrediction, Member};
use nsga_pinn_core::{GenerationRecord, Individual, ObjectiveVector};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const GENERATIONS_HEADER: [&str; 7] = [
    "gen",
    "min_f1",
    "min_f2",
    "min_f3",
    "min_total",
    "survival_rate",
    "front1_size",
];

/// `{:.16e}`: one leading digit plus sixteen decimals.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// One `generations.csv` row.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRow {
    pub gen: usize,
    pub min_f: [f64; 3],
    pub min_total: f64,
    pub survival_rate: f64,
    pub front1_size: usize,
}

impl From<&GenerationRecord> for GenerationRow {
    fn from(r: &GenerationRecord) -> Self {
        let f = |k: usize| r.min_objectives.get(k).copied().unwrap_or(f64::NAN);
        Self {
            gen: r.generation,
            min_f: [f(0), f(1), f(2)],
            min_total: r.min_total,
            survival_rate: r.survival_rate,
            front1_size: r.front_sizes.first().copied().unwrap_or(0),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Format {
            path: path.into(),
            message: format!("{other:?}"),
        },
    }
}

pub fn write_generations(path: &Path, records: &[GenerationRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(GENERATIONS_HEADER)
        .map_err(|e| csv_err(path, e))?;
    for r in records {
        let row = GenerationRow::from(r);
        w.write_record([
            row.gen.to_string(),
            fmt_real(row.min_f[0]),
            fmt_real(row.min_f[1]),
            fmt_real(row.min_f[2]),
            fmt_real(row.min_total),
            fmt_real(row.survival_rate),
            row.front1_size.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_generations(path: &Path) -> Result<Vec<GenerationRow>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(GENERATIONS_HEADER) {
        return Err(CliError::Format {
            path: path.into(),
            message: format!("unexpected header {header:?}"),
        });
    }
    let bad = |m: String| CliError::Format {
        path: path.into(),
        message: m,
    };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let real = |i: usize| -> Result<f64, CliError> {
            rec[i]
                .parse()
                .map_err(|e| bad(format!("column {}: {e}", GENERATIONS_HEADER[i])))
        };
        let int = |i: usize| -> Result<usize, CliError> {
            rec[i]
                .parse()
                .map_err(|e| bad(format!("column {}: {e}", GENERATIONS_HEADER[i])))
        };
        rows.push(GenerationRow {
            gen: int(0)?,
            min_f: [real(1)?, real(2)?, real(3)?],
            min_total: real(4)?,
            survival_rate: real(5)?,
            front1_size: int(6)?,
        });
    }
    Ok(rows)
}

/// Long format: one row per query point and output.
pub fn write_prediction(
    path: &Path,
    grid: &PredictionGrid,
    ens: &EnsemblePrediction,
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header: Vec<&str> = grid.input_names.clone();
    header.extend(["output", "mean", "lo95", "hi95", "reference"]);
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    let d_in = grid.input_names.len();
    let d_out = grid.output_names.len();
    for i in 0..grid.rows() {
        for (j, name) in grid.output_names.iter().enumerate() {
            let k = i * d_out + j;
            let mut row: Vec<String> = grid.inputs[i * d_in..(i + 1) * d_in]
                .iter()
                .map(|&x| fmt_real(x))
                .collect();
            row.push((*name).to_string());
            row.extend([ens.mean[k], ens.lower[k], ens.upper[k], grid.reference[k]].map(fmt_real));
            w.write_record(&row).map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodLosses {
    pub method: String,
    /// Component name to value, plus `total`.
    pub losses: BTreeMap<String, f64>,
}

impl MethodLosses {
    pub fn new(method: &str, objectives: &ObjectiveVector) -> Self {
        let mut losses: BTreeMap<String, f64> = objectives
            .0
            .iter()
            .map(|c| (c.name.name().to_string(), c.value))
            .collect();
        losses.insert("total".into(), objectives.total());
        Self {
            method: method.into(),
            losses,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FinalLosses {
    pub methods: Vec<MethodLosses>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodEstimate {
    pub method: String,
    pub k_hat: f64,
    pub k_true: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Estimates {
    pub methods: Vec<MethodEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMember {
    pub label: u64,
    pub objectives: Vec<f64>,
    pub params: Vec<f64>,
    pub extra_scalars: usize,
}

/// Final population of one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub method: String,
    pub members: Vec<CheckpointMember>,
}

impl Checkpoint {
    pub fn new(method: &str, population: &[Individual<Member>]) -> Self {
        Self {
            method: method.into(),
            members: population
                .iter()
                .map(|i| CheckpointMember {
                    label: i.label.0,
                    objectives: i.objectives.clone(),
                    params: i.genome.params.values.clone(),
                    extra_scalars: i.genome.params.extra_scalars,
                })
                .collect(),
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::io(path, e.into()))?;
    w.write_all(b"\n").map_err(|e| CliError::io(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Format {
        path: path.into(),
        message: e.to_string(),
    })
}
