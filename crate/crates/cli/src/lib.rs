//! The `rmg` command-line tool as a library: argument parsing, JSON config
//! loading and one function per command.
//!
//! Exit codes: 0 success, 1 output I/O failure, 2 config or input error
//! (the message names the offending key or frame), 3 non-finite training
//! loss, 4 `validate` found invalid data.

pub mod commands;
pub mod error;
pub mod io;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use error::{exit, CliError, CliResult};

use commands::convert::{cmd_convert, ConvertRunConfig};
use commands::eval::{cmd_eval, EvalRunConfig};
use commands::sample::{cmd_sample, SampleRunConfig};
use commands::sweep::{cmd_sweep, SweepRunConfig};
use commands::train::{cmd_train, TrainRunConfig};
use commands::validate::{cmd_validate, ValidateRunConfig};
use io::read_config;

#[derive(Debug, Parser)]
#[command(name = "rmg", version, about = "Riemannian flow matching for articulated motion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON config file.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct WithCheckpoint {
    #[command(flatten)]
    pub common: Common,
    /// Overrides the config checkpoint path.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a velocity network; writes checkpoint.rmg and losses.csv.
    Train(Common),
    /// Sample from a checkpoint; writes samples plus samples.meta.json.
    Sample(WithCheckpoint),
    /// Convert between motion JSON, manifold points and joint positions.
    Convert(Common),
    /// Compare samples to reference data; writes metrics.json.
    Eval(Common),
    /// Sample and evaluate across guidance scales; writes sweep.csv.
    Sweep(WithCheckpoint),
    /// Check files against the manifold constraints; writes validation.json.
    Validate(Common),
}

/// Runs one command; the message of a returned error is meant for stderr.
pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Train(c) => {
            let mut cfg: TrainRunConfig = read_config(&c.config)?;
            if let Some(s) = c.seed {
                cfg.train.seed = s;
            }
            let s = cmd_train(&cfg, &c.config, &c.out)?;
            log::info!("wrote {} after {} steps", s.checkpoint.display(), s.steps);
        }
        Command::Sample(a) => {
            let mut cfg: SampleRunConfig = read_config(&a.common.config)?;
            if let Some(s) = a.common.seed {
                cfg.seed = s;
            }
            cmd_sample(&cfg, &a.common.config, a.checkpoint.as_deref(), &a.common.out)?;
        }
        Command::Convert(c) => {
            let cfg: ConvertRunConfig = read_config(&c.config)?;
            cmd_convert(&cfg, &c.config, &c.out)?;
        }
        Command::Eval(c) => {
            let cfg: EvalRunConfig = read_config(&c.config)?;
            cmd_eval(&cfg, &c.config, &c.out)?;
        }
        Command::Sweep(a) => {
            let cfg: SweepRunConfig = read_config(&a.common.config)?;
            let rows = cmd_sweep(&cfg, &a.common.config, a.checkpoint.as_deref(), a.common.seed, &a.common.out)?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                log::warn!("{failed} of {} sweep rows failed", rows.len());
            }
        }
        Command::Validate(c) => {
            let cfg: ValidateRunConfig = read_config(&c.config)?;
            cmd_validate(&cfg, &c.config, &c.out)?;
        }
    }
    Ok(())
}

/// Caps the global worker pool at `RMG_THREADS` when set.
pub fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("RMG_THREADS") else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n >= 1)
        .ok_or_else(|| CliError::input(format!("RMG_THREADS: expected a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))
}
