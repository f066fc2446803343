//! `slowfast` — configuration-driven front end for analyzing and simulating
//! slow ODEs driven by fast finite-state Markov processes with multiple
//! ergodic classes.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CmdError, CmdResult};
use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "slowfast",
    about = "Analyze, simulate and verify slow-fast systems whose fast chain has multiple ergodic classes",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Path to the TOML run configuration.
    #[arg(long, global = true, default_value = "slowfast.toml")]
    config: PathBuf,

    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Chain structure at the anchor: decomposition, absorption, stationary
    /// laws, limit law, assumption certificate.
    Analyze,
    /// One recorded coupled trajectory plus an optional Monte Carlo summary.
    Simulate,
    /// Weak-error, fast-decay and sequence-gap experiments.
    Converge,
    /// Run the acceptance suite; exit 0 iff every criterion passes.
    Verify,
}

fn load_config(cli: &Cli) -> Result<(RunConfig, PathBuf), CmdError> {
    let text = std::fs::read_to_string(&cli.config).map_err(|e| {
        CmdError::Validation(format!("cannot read config {}: {e}", cli.config.display()))
    })?;
    let mut cfg = RunConfig::parse(&text).map_err(CmdError::Validation)?;
    if let Some(seed) = cli.seed {
        cfg.simulation.seed = seed;
    }
    let out_dir = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    Ok((cfg, out_dir))
}

fn run(cli: &Cli) -> CmdResult {
    let (cfg, out_dir) = load_config(cli)?;
    match cli.command {
        Command::Analyze => commands::cmd_analyze(&cfg, &out_dir),
        Command::Simulate => commands::cmd_simulate(&cfg, &out_dir),
        Command::Converge => commands::cmd_converge(&cfg, &out_dir),
        Command::Verify => commands::cmd_verify(&cfg, &out_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CmdError::Validation(msg) => eprintln!("validation error: {msg}"),
                CmdError::Assumption(msg) => eprintln!("assumption violation: {msg}"),
                CmdError::AcceptanceFailed => eprintln!("acceptance criteria failed"),
                CmdError::Io(msg) => eprintln!("io error: {msg}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
