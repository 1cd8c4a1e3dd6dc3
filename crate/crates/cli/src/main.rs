//! `cda`: simulate the continuous double auction and write its data products.

use std::path::PathBuf;
use std::process::ExitCode;

use cda_core::config::{ConfigError, RunConfig, RunConfigFile};
use cda_core::engine::{self, RunOptions};
use cda_core::ensemble;
use cda_core::output::{self, OutputError};
use clap::{Args, Parser, Subcommand};

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "cda", version, about = "Continuous double auction simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single run: trades.csv, returns.csv, queue.csv, acf.csv, summary.json.
    Simulate(CommonArgs),
    /// Seeded ensemble: per_run_stats.csv, aggregate.csv, eccdf_*.csv, acf_mean.csv.
    Ensemble {
        #[command(flatten)]
        common: CommonArgs,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// One ensemble per entry of rho_grid: sweep.csv.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Closed-form queueing results and regime.
    Theory {
        #[command(flatten)]
        common: CommonArgs,
        /// Largest queue length in the pmf table.
        #[arg(long, default_value_t = 10)]
        cutoff: u64,
    },
}

/// A config file plus an override flag for every key.
#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML configuration file.
    config: Option<PathBuf>,
    /// Number of price classes (`N`).
    #[arg(long)]
    grid_size: Option<usize>,
    /// Placement window width (`n`).
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    lambda_a: Option<f64>,
    #[arg(long)]
    lambda_b: Option<f64>,
    #[arg(long)]
    mu_a: Option<f64>,
    #[arg(long)]
    mu_b: Option<f64>,
    /// Symmetric shorthand: lambda = rho, mu = 1.
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    p0: Option<usize>,
    /// Events per run.
    #[arg(long)]
    events: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    max_lag: Option<usize>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Comma-separated rho values.
    #[arg(long, value_delimiter = ',')]
    rho_grid: Option<Vec<f64>>,
}

impl CommonArgs {
    fn resolve(self) -> Result<RunConfig, ConfigError> {
        let file = match &self.config {
            Some(path) => RunConfigFile::load(path)?,
            None => RunConfigFile::default(),
        };
        let overrides = RunConfigFile {
            grid_size: self.grid_size,
            window: self.window,
            lambda_a: self.lambda_a,
            lambda_b: self.lambda_b,
            mu_a: self.mu_a,
            mu_b: self.mu_b,
            rho: self.rho,
            p0: self.p0,
            events: self.events,
            seed: self.seed,
            runs: self.runs,
            max_lag: self.max_lag,
            output_dir: self.output_dir,
            rho_grid: self.rho_grid,
        };
        file.merge(overrides).resolve()
    }
}

enum Failure {
    Config(ConfigError),
    Output(OutputError),
    Run(cda_core::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<OutputError> for Failure {
    fn from(e: OutputError) -> Self {
        Failure::Output(e)
    }
}

impl From<cda_core::Error> for Failure {
    fn from(e: cda_core::Error) -> Self {
        Failure::Run(e)
    }
}

fn run_ensemble(
    config: &cda_core::EnsembleConfig,
    workers: Option<usize>,
) -> cda_core::Result<cda_core::EnsembleSummary> {
    match workers {
        Some(w) => ensemble::run_ensemble_with_workers(config, w),
        None => ensemble::run_ensemble(config),
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Simulate(common) => {
            let cfg = common.resolve()?;
            let params = cfg.params()?;
            let out = engine::run_with(
                &params,
                cfg.events,
                cfg.seed,
                RunOptions { record_queue: true },
            )?;
            let summary =
                output::write_simulation(&cfg.output_dir, &params, cfg.seed, &out, cfg.max_lag)?;
            println!(
                "{} events, {} trades, regime {}; wrote {}",
                summary.events,
                summary.trades,
                summary.regime,
                cfg.output_dir.display()
            );
        }
        Command::Ensemble { common, workers } => {
            let cfg = common.resolve()?;
            let summary = run_ensemble(&cfg.ensemble()?, workers)?;
            output::write_ensemble(&cfg.output_dir, &summary)?;
            for (name, agg) in summary.aggregate.named() {
                println!(
                    "{name:>9}: mean {} stderr {} (excluded {})",
                    fmt_opt(agg.mean),
                    fmt_opt(agg.stderr),
                    agg.excluded
                );
            }
        }
        Command::Sweep { common, workers } => {
            let cfg = common.resolve()?;
            let configs = cfg.sweep()?;
            let mut rows = Vec::with_capacity(configs.len());
            for c in &configs {
                let summary = run_ensemble(c, workers)?;
                rows.push(cda_core::SweepRow {
                    rho: c.params.lambda_a / c.params.mu_b,
                    summary,
                });
                eprintln!("rho = {} done", c.params.lambda_a / c.params.mu_b);
            }
            output::write_sweep(&cfg.output_dir, &rows)?;
            println!("wrote {}", cfg.output_dir.join("sweep.csv").display());
        }
        Command::Theory { common, cutoff } => {
            let cfg = common.resolve()?;
            print!("{}", output::theory_report(&cfg.params()?, cutoff));
        }
    }
    Ok(())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".to_owned(), |v| format!("{v:.6}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Output(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_IO)
        }
        // Model validation failures are configuration errors.
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
