//! `burstkernel` command-line driver.

mod commands;
mod config;
mod error;
mod noise;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Config;
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "burstkernel", version, about = "Burst denoising with per-pixel kernels")]
struct Cli {
    /// JSON file of defaults; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true, env = "BURSTKERNEL_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a clean and noisy burst from an image.
    Simulate(commands::simulate::SimulateArgs),
    /// Estimate kernels and filter a burst.
    Denoise(commands::denoise::DenoiseArgs),
    /// Time the filtering backends.
    Bench(commands::bench::BenchArgs),
    /// Basis rank, overlap and clustering statistics.
    Analyze(commands::analyze::AnalyzeArgs),
}

fn run(cli: &Cli) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(n) = cfg.pick_opt(cli.threads, "threads")? {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Simulate(a) => commands::simulate::run(a, &cfg),
        Command::Denoise(a) => commands::denoise::run(a, &cfg),
        Command::Bench(a) => commands::bench::run(a, &cfg),
        Command::Analyze(a) => commands::analyze::run(a, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("burstkernel: {e}");
            e.exit_code()
        }
    }
}
