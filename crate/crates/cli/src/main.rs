//! `airy-lab`: runs one experiment per invocation from a TOML config.
//!
//! Exit status 0 on success, 1 on a numerical failure (a JSON error record
//! goes to stderr), 2 on a usage error. Nothing is written unless the run
//! succeeds.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use airy_lab::LabError;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Propagate the input field by the Airy or Schrödinger flow.
    Propagate,
    /// Mixed space-time norm of the Airy evolution.
    Norm,
    /// Concentration functional and refined ratio.
    Concentrate,
    /// Whitney pairs of a dyadic region and a coverage check.
    WhitneyCheck,
    /// Bubble extraction.
    Extract,
    /// Pairwise separation scores of Gaussian profiles.
    Separation,
    /// Projected gradient ascent of a Strichartz ratio.
    Maximize,
    /// Gaussian estimate of the Schrödinger constant.
    Baseline,
    /// High-frequency embedding of Schrödinger into Airy.
    Embed,
    /// Airy ascent against the embedded Schrödinger baseline.
    Dichotomy,
    /// Planted bubbles plus optional noise.
    Synth,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Propagate => "propagate",
            Command::Norm => "norm",
            Command::Concentrate => "concentrate",
            Command::WhitneyCheck => "whitney-check",
            Command::Extract => "extract",
            Command::Separation => "separation",
            Command::Maximize => "maximize",
            Command::Baseline => "baseline",
            Command::Embed => "embed",
            Command::Dichotomy => "dichotomy",
            Command::Synth => "synth",
        }
    }
}

#[derive(Debug, Args)]
struct Flags {
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random draw; overrides the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Parser)]
#[command(name = "airy-lab", version, about = "Numerical experiments on Airy Strichartz estimates")]
struct Invocation {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(LabError),
    Io(String),
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        CliError::Numeric(e)
    }
}

#[derive(Serialize)]
struct ErrorRecord {
    status: &'static str,
    kind: &'static str,
    message: String,
}

fn kind(e: &LabError) -> &'static str {
    match e {
        LabError::InvalidInput(_) => "invalid_input",
        LabError::InvalidParameter(_) => "invalid_parameter",
        LabError::InvalidExponent(_) => "invalid_exponent",
        LabError::Inadmissible { .. } => "inadmissible",
        LabError::SingularMultiplier { .. } => "singular_multiplier",
        LabError::DegenerateInput(_) => "degenerate_input",
        LabError::InvalidConfig(_) => "invalid_config",
        LabError::GridMismatch(_) => "grid_mismatch",
        LabError::ModulationAliased { .. } => "modulation_aliased",
        LabError::Io(_) => "io",
    }
}

fn run(inv: &Invocation) -> Result<(), CliError> {
    let path = inv
        .flags
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("--config <path> is required".into()))?;
    let cfg = ExperimentConfig::load(path)?;
    let seed = inv.flags.seed.or(cfg.seed).unwrap_or(0);
    let artifacts = commands::execute(inv.command, &cfg, seed)?;
    let written = artifacts
        .commit(&inv.flags.out)
        .map_err(|e| CliError::Io(format!("writing to {}: {e}", inv.flags.out.display())))?;
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let inv = Invocation::parse();
    match run(&inv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n\nUsage: airy-lab <COMMAND> --config <PATH> [--seed <SEED>] [--out <DIR>]");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(e)) => {
            let record = ErrorRecord {
                status: "error",
                kind: kind(&e),
                message: e.to_string(),
            };
            eprintln!("{}", serde_json::to_string(&record).expect("plain record"));
            ExitCode::from(1)
        }
        Err(CliError::Io(msg)) => {
            let record = ErrorRecord {
                status: "error",
                kind: "io",
                message: msg,
            };
            eprintln!("{}", serde_json::to_string(&record).expect("plain record"));
            ExitCode::from(1)
        }
    }
}
