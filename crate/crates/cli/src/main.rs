mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use error::CliError;
use output::{Format, Output};

/// Reproducible experiments on discrete determinantal point processes and
/// quasi-free GICAR states.
#[derive(Debug, Parser)]
#[command(name = "dpp-gicar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON experiment config; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Monte Carlo trials for `evolve` and `zmeasure`.
    #[arg(long, global = true)]
    mc: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Correlation kernel, one- and two-point correlations, projector checks.
    Kernel,
    /// Transition matrix `P_t`, its Markov checks and an optional Monte Carlo row.
    Evolve,
    /// CAR, quasi-free, Wick, Evans-map and Hamiltonian identities.
    VerifyCar,
    /// z-measure masses, kernel cross-check, generator and jump-chain statistics.
    Zmeasure,
    /// Exact samples of the point process against the kernel diagonal.
    Sample,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Kernel => "kernel",
            Command::Evolve => "evolve",
            Command::VerifyCar => "verify-car",
            Command::Zmeasure => "zmeasure",
            Command::Sample => "sample",
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("DPP_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("DPP_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: &Cli) -> Result<String, CliError> {
    configure_threads()?;
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(trials) = cli.mc {
        config.trials = Some(trials);
    }
    let out = Output::new(&cli.out, cli.format, cli.command.name(), &config)?;
    match cli.command {
        Command::Kernel => commands::kernel::run(&config, &out),
        Command::Evolve => commands::evolve::run(&config, &out),
        Command::VerifyCar => commands::verify_car::run(&config, &out),
        Command::Zmeasure => commands::zmeasure::run(&config, &out),
        Command::Sample => commands::sample::run(&config, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("dpp-gicar {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
