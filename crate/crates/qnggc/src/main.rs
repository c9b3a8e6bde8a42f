use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qnggc::bench::{grid_search, run_experiment, target_energy};
use qnggc::config::{BValue, Example, ExperimentSpec};
use qnggc::output::{fmt_f64, write_outputs};
use qnggc::{BenchError, Result};

#[derive(Parser)]
#[command(name = "qnggc", version, about = "Natural-gradient VQE benchmarks with geodesic correction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured optimizer and write trajectories.csv / aggregate.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the number of random initial points.
        #[arg(long)]
        seeds: Option<usize>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        parallel: Option<usize>,
    },
    /// Grid-search (eta, b) per optimizer by median final energy gap.
    Grid {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated learning rates.
        #[arg(long, value_delimiter = ',', required = true)]
        eta: Vec<f64>,
        /// Comma-separated b values; `eta^2` ties b to the learning rate.
        #[arg(long, value_delimiter = ',', required = true)]
        b: Vec<BValue>,
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        parallel: Option<usize>,
    },
    /// Print the exact ground energy of a model.
    Oracle {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 10.0)]
        h: f64,
        #[arg(long, default_value_t = 0.4)]
        alpha: f64,
        #[arg(long, default_value_t = 0.2)]
        beta: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Ex1,
    H2,
    Tfim,
}

fn load(config: &Path, seeds: Option<usize>) -> Result<ExperimentSpec> {
    let spec = ExperimentSpec::load(config)?;
    match seeds {
        Some(n) => spec.with_seed_count(n),
        None => Ok(spec),
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out, seeds, parallel } => {
            let spec = load(&config, seeds)?;
            let result = run_experiment(&spec, parallel)?;
            let (traj, agg) = write_outputs(&out, &result)?;
            println!("target energy {}", fmt_f64(result.target_energy));
            for a in &result.aggregates {
                if let Some(last) = a.rows.last() {
                    println!(
                        "{:<12} seeds={:<4} final median dE={:.6e} mean log10 dE={:.4}",
                        a.optimizer, a.seeds, last.median_delta_e, last.mean_log10_delta_e
                    );
                }
            }
            println!("wrote {} and {}", traj.display(), agg.display());
        }
        Command::Grid { config, eta, b, seeds, parallel } => {
            let spec = load(&config, seeds)?;
            for choice in grid_search(&spec, &eta, &b, parallel)? {
                let best = &choice.best;
                let b = best.b.map_or_else(|| "-".to_string(), |b| b.to_string());
                println!(
                    "{:<12} eta={} b={} median final dE={:.6e} (failed runs: {})",
                    choice.optimizer, best.eta, b, best.median_final_delta_e, best.failed_runs
                );
            }
        }
        Command::Oracle { model, n, h, alpha, beta } => {
            let example = match model {
                Model::Ex1 => Example::Ex1,
                Model::H2 => Example::H2 { alpha, beta },
                Model::Tfim => {
                    if !(2..=qnggc_core::statevector::MAX_DENSE_QUBITS).contains(&n) {
                        return Err(BenchError::config("--n", "TFIM size out of range"));
                    }
                    Example::Tfim { n_qubits: n, h }
                }
            };
            println!("{}", fmt_f64(target_energy(example)?));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
