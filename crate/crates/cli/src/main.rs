//! `wgt` — weighted mixing matrices, spectral gap reports, rate bounds, and
//! decentralized gradient-tracking experiments.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{cmd_bounds, cmd_build_graph, cmd_compare, cmd_gaps, cmd_simulate, exit_code};
use config::Config;

#[derive(Parser)]
#[command(
    name = "wgt",
    about = "Heterogeneous-weight mixing matrices and gradient-tracking experiments",
    version
)]
struct Cli {
    /// TOML configuration file; defaults to the built-in benchmark presets.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for generated artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Seed override: replaces the topology seed and the seed list.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker-pool size for seed-level parallelism (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral-gap table over the configured topologies (CSV).
    Gaps,
    /// Synthesize the weight-proportional graph (edge list + JSON sidecar).
    BuildGraph,
    /// Run gradient tracking over seeds and strategies (CSVs + manifest).
    Simulate,
    /// Spectral comparison of the two strategies with condition flags (JSON).
    Compare {
        /// Also run both strategies and report the final metric ratio.
        #[arg(long)]
        with_runs: bool,
    },
    /// Evaluate the convergence-rate bounds on the configured instance (JSON).
    Bounds,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("failed to size worker pool: {e}");
            return ExitCode::from(2);
        }
    }

    let config = match Config::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };

    let result = match &cli.command {
        Command::Gaps => cmd_gaps(&config, &cli.out, cli.seed),
        Command::BuildGraph => cmd_build_graph(&config, &cli.out, cli.seed),
        Command::Simulate => cmd_simulate(&config, &cli.out, cli.seed),
        Command::Compare { with_runs } => cmd_compare(&config, &cli.out, cli.seed, *with_runs),
        Command::Bounds => cmd_bounds(&config, &cli.out, cli.seed),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
