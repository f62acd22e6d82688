use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nsga_pinn::config::{self, Overrides};
use nsga_pinn::experiment::run_experiment;
use nsga_pinn::oracle::{brute_force_ranks, loss_oracle};
use nsga_pinn::report::write_report;
use nsga_pinn::{CliError, Threads};
use nsga_pinn_core::nsga::non_dominated_sort;
use nsga_pinn_core::problems::{evaluate_objectives, PinnProblem};
use nsga_pinn_core::rng::{purpose, stream};
use nsga_pinn_core::{Individual, Mode};

/// Multi-objective evolutionary training of physics-informed networks.
#[derive(Parser)]
#[command(name = "nsga-pinn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its result files.
    Run(ConfigArgs),
    /// Resolve a config and print it without running.
    ValidateConfig(ConfigArgs),
    /// Cross-check the core crate against brute-force references.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Aggregate the repetitions of a finished run.
    Report {
        /// Output directory of a previous `run`.
        #[arg(long)]
        input: PathBuf,
    },
    /// Write every built-in experiment preset as a JSON config.
    Presets {
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    /// `key=value` override; keys are dot-separated, values parse as JSON.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run a single method instead of the config's `modes`.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// Replaces `output_dir`.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Compare front ranks of a headerless objectives CSV with a brute-force
    /// sort.
    Sort {
        #[arg(long)]
        input: PathBuf,
    },
    /// Compare the loss components of a freshly initialised network with
    /// finite-difference references.
    Loss {
        #[command(flatten)]
        config: ConfigArgs,
        /// Relative tolerance per component.
        #[arg(long, default_value_t = 1e-5)]
        tolerance: f64,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| "expected one of nsga_pinn, adam_only, nsga_only".to_string())
}

impl ConfigArgs {
    fn load(&self) -> Result<nsga_pinn::ExperimentConfig, CliError> {
        let overrides = Overrides {
            sets: self.sets.clone(),
            seed: self.seed,
            mode: self.mode,
            output_dir: self.output.as_ref().map(|p| p.display().to_string()),
        };
        config::load(&self.config, &overrides)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or("usage error")
                .trim_start_matches("error: ");
            return fail(CliError::Usage(first.to_string()));
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("{}", e.to_json_line());
    ExitCode::from(e.exit_code() as u8)
}

fn dispatch(command: Command) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    let out_err = |e| CliError::io("<stdout>", e);
    match command {
        Command::Run(args) => {
            let config = args.load()?;
            let exec = Threads::from_env();
            let summaries = run_experiment(&config, &exec, |line| eprintln!("{line}"))?;
            writeln!(
                stdout,
                "wrote {} repetition(s) to {}",
                summaries.len(),
                config.output_dir
            )
            .map_err(out_err)?;
        }
        Command::ValidateConfig(args) => {
            let config = args.load()?;
            let text = serde_json::to_string_pretty(&config.with_explicit_seeds())
                .expect("config serializes");
            writeln!(stdout, "{text}").map_err(out_err)?;
        }
        Command::Oracle(OracleCommand::Sort { input }) => oracle_sort(&input, &mut stdout)?,
        Command::Oracle(OracleCommand::Loss { config, tolerance }) => {
            let cfg = config.load()?;
            let problem = cfg.problem.build()?;
            let mut rng = stream(&[purpose::INIT, cfg.run.master_seed, 0]);
            let params = problem.mlp().init(&mut rng, &problem.initial_extras());
            let fast = evaluate_objectives(&problem, &params)?;
            let slow = loss_oracle(&problem, &params);
            let mut worst = 0.0f64;
            let mut report = serde_json::Map::new();
            for (c, s) in fast.0.iter().zip(slow) {
                let rel = (c.value - s).abs() / s.abs().max(f64::MIN_POSITIVE);
                worst = worst.max(rel);
                report.insert(
                    c.name.name().into(),
                    serde_json::json!({"implementation": c.value, "oracle": s, "relative_error": rel}),
                );
            }
            writeln!(stdout, "{}", serde_json::Value::Object(report)).map_err(out_err)?;
            if !(worst <= tolerance) {
                return Err(CliError::OracleMismatch(format!(
                    "loss relative error {worst:e} exceeds {tolerance:e}"
                )));
            }
        }
        Command::Report { input } => {
            let (means, _) = write_report(&input)?;
            for m in means {
                writeln!(
                    stdout,
                    "{}: {} generation(s) over {} repetition(s)",
                    m.method,
                    m.gen.len(),
                    m.repetitions
                )
                .map_err(out_err)?;
            }
        }
        Command::Presets { output } => config::write_presets(&output)?,
    }
    Ok(())
}

fn oracle_sort(input: &Path, out: &mut impl Write) -> Result<(), CliError> {
    let format_err = |m: String| CliError::Format {
        path: input.into(),
        message: m,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(input)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(input, io),
            other => format_err(format!("{other:?}")),
        })?;
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| format_err(e.to_string()))?;
        let row: Vec<f64> = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| format_err(format!("{s:?}: {e}")))
            })
            .collect::<Result<_, _>>()?;
        rows.push(row);
    }
    let mut pop: Vec<Individual> = rows
        .iter()
        .enumerate()
        .map(|(i, o)| Individual::bare(i as u64, o.clone()))
        .collect();
    non_dominated_sort(&mut pop).map_err(|e| format_err(e.to_string()))?;
    let oracle = brute_force_ranks(&rows);
    let out_err = |e| CliError::io("<stdout>", e);
    writeln!(out, "index,rank,oracle_rank").map_err(out_err)?;
    let mut mismatches = 0;
    for (i, ind) in pop.iter().enumerate() {
        let rank = ind.rank.unwrap_or(0);
        if rank != oracle[i] {
            mismatches += 1;
        }
        writeln!(out, "{i},{rank},{}", oracle[i]).map_err(out_err)?;
    }
    if mismatches > 0 {
        return Err(CliError::OracleMismatch(format!(
            "{mismatches} rank(s) differ"
        )));
    }
    Ok(())
}
