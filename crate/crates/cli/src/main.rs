//! `hamlearn`: config-driven runner for data generation, learning, sweeps
//! and validation.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Output;
use config::ExperimentConfig;
use error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "hamlearn", version, about = "Learn Hamiltonians and states from observable time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset (Hamiltonian, state or qutrit, per `data_kind`).
    GenData(Common),
    /// Learn Hamiltonian coefficients.
    LearnHam(Common),
    /// Learn ansatz angles of an unknown state.
    LearnState(Common),
    /// Learn the eight coefficients of a qutrit Hamiltonian.
    LearnSu3(Common),
    /// Train every (N_T, N_S, N_O) cell of the configured grid.
    Sweep(Common),
    /// Compare a learned model against held-out dynamics.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; all cores by default.
    #[arg(long)]
    parallel: Option<usize>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    /// Learned Hamiltonian JSON.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Held-out dataset JSON.
    #[arg(long, conflicts_with = "truth")]
    data: Option<PathBuf>,
    /// True Hamiltonian JSON; held-out series are generated from it.
    #[arg(long)]
    truth: Option<PathBuf>,
}

fn setup(c: &Common) -> CliResult<(ExperimentConfig, Output)> {
    let cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    }
    .with_seed(c.seed);
    cfg.validate()?;
    if let Some(n) = c.parallel {
        if n == 0 {
            return Err(CliError::Config("--parallel must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok((cfg, Output::create(&c.out)?))
}

fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::GenData(c) => setup(&c).and_then(|(cfg, out)| commands::gen_data(&cfg, &out)),
        Command::LearnHam(c) => setup(&c).and_then(|(cfg, out)| commands::learn_ham(&cfg, &out)),
        Command::LearnState(c) => setup(&c).and_then(|(cfg, out)| commands::learn_state(&cfg, &out)),
        Command::LearnSu3(c) => setup(&c).and_then(|(cfg, out)| commands::learn_su3_cmd(&cfg, &out)),
        Command::Sweep(c) => setup(&c).and_then(|(cfg, out)| commands::sweep(&cfg, &out)),
        Command::Validate(v) => {
            let (cfg, out) = setup(&v.common)?;
            commands::validate(&cfg, &out, v.model.as_deref(), v.data.as_deref(), v.truth.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) => {
            println!("{}", report.trim_end());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
