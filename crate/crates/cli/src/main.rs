use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use warpbo::bench;
use warpbo_cli::config::{Command, ObjectiveSpec};
use warpbo_cli::{aggregate_dir, run_experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "warpbo", version, about = "Bayesian optimisation with prior-warped kernels")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every method and seed of an experiment config.
    Run {
        config: PathBuf,
        /// Parallel runs (defaults to the number of CPUs).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Use this shell command as the objective instead of the config's.
        #[arg(long)]
        objective_cmd: Option<String>,
    },
    /// Recompute aggregate files from the traces in a directory.
    Aggregate { dir: PathBuf },
    /// Print the builtin objectives.
    ListObjectives,
}

const VALIDATION: u8 = 1;
const RUNTIME: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(VALIDATION) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Cmd::Run {
            config,
            jobs,
            output_dir,
            objective_cmd,
        } => {
            let mut cfg = match ExperimentConfig::from_path(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(VALIDATION);
                }
            };
            if let Some(cmd) = objective_cmd {
                // keep the replaced builtin's box unless the config gives one
                if let (None, ObjectiveSpec::Builtin(name)) = (&cfg.bounds, &cfg.objective) {
                    cfg.bounds = bench::Benchmark::by_name(name).map(|b| b.bounds);
                }
                cfg.objective = ObjectiveSpec::External {
                    external: Command::Shell(cmd),
                };
            }
            if output_dir.is_some() {
                cfg.output_dir = output_dir;
            }
            let exp = match cfg.validate() {
                Ok(e) => e,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(VALIDATION);
                }
            };
            let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            match run_experiment(&exp, jobs) {
                Ok(cells) => {
                    println!("{} runs written to {}", cells.len(), exp.output_dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(RUNTIME)
                }
            }
        }
        Cmd::Aggregate { dir } => match aggregate_dir(&dir) {
            Ok(done) if done.is_empty() => {
                eprintln!("error: no trace files in {}", dir.display());
                ExitCode::from(VALIDATION)
            }
            Ok(done) => {
                for (m, n) in done {
                    println!("{}: {n} runs", m.name());
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(RUNTIME)
            }
        },
        Cmd::ListObjectives => {
            for b in bench::all() {
                println!("{:<12} dim {}  bounds {:?}  min {}", b.name, b.dim, b.bounds, b.known_min_value);
            }
            ExitCode::SUCCESS
        }
    }
}
