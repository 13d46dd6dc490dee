//! `qlayers`: config-driven analysis of Dirichlet layers around surfaces.
//!
//! Exit codes: 0 success, 1 configuration, 2 hypothesis violated, 3 numerical failure.

mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::{Command, RunConfig};
use quantum_layers::ErrorClass;

#[derive(Parser)]
#[command(
    name = "qlayers",
    version,
    about = "Spectrum below the threshold for layers around non-compact surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Audit the surface and layer; print the condition table.
    Analyze(Args),
    /// Search for a trial function certifying spectrum below the threshold.
    Certify(Args),
    /// Count eigenvalues below the threshold (surfaces of revolution only).
    Solve(Args),
    /// Run one command over a grid of parameters.
    Sweep(Args),
    /// Truncated integrals of M^2 against radius (exploratory).
    ProbeConjecture(Args),
    /// Run the command named in the config file.
    Run(Args),
}

#[derive(clap::Args)]
struct Args {
    /// TOML run configuration.
    config: PathBuf,
    /// Output directory, overriding `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err
        .chain()
        .find_map(|e| e.downcast_ref::<quantum_layers::Error>())
        .map(|e| e.class())
    {
        Some(ErrorClass::Hypothesis) => 2,
        Some(ErrorClass::Numerical) => 3,
        Some(ErrorClass::Config) | None => 1,
    }
}

fn execute(cli: Cli) -> Result<String> {
    let (fixed, args) = match cli.command {
        Cmd::Analyze(a) => (Some(Command::Analyze), a),
        Cmd::Certify(a) => (Some(Command::Certify), a),
        Cmd::Solve(a) => (Some(Command::Solve), a),
        Cmd::Sweep(a) => (Some(Command::Sweep), a),
        Cmd::ProbeConjecture(a) => (Some(Command::ProbeConjecture), a),
        Cmd::Run(a) => (None, a),
    };
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(out) = args.out {
        cfg.output_dir = std::env::current_dir()?.join(out);
    }
    let command = fixed.or(cfg.command).ok_or_else(|| {
        quantum_layers::Error::InvalidInput("`run` needs a `command` field in the config".into())
    })?;
    let dir = cfg.output_dir();
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    match command {
        Command::Analyze => output::analysis(&dir, &run::analyze(&cfg)?),
        Command::Certify => output::certificate(&dir, &run::certify(&cfg)?),
        Command::Solve => output::spectrum(&dir, &run::solve(&cfg)?),
        Command::Sweep => output::sweep(&dir, &run::sweep(&cfg)?),
        Command::ProbeConjecture => output::probe(&dir, &run::probe_conjecture(&cfg)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match execute(cli) {
        Ok(summary) => {
            print!("{summary}");
            eprintln!("done in {:.2?}", start.elapsed());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
