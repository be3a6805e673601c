//! Command-line harness: runs, sweeps, the Jester comparison, scaling
//! studies and the validator suite.

pub mod checks;
pub mod commands;
pub mod output;
pub mod plot;

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub const EXIT_RUNTIME: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const THREADS_VAR: &str = "OLFW_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "olfw",
    version,
    about = "Online Lagrangian Frank-Wolfe experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (defaults to the configured `output_dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the configured scenario for every replicate seed.
    Run { config: PathBuf },
    /// Sweep delta, mu or T and average over seeds.
    Sweep { config: PathBuf },
    /// Run the validator suite.
    Check {
        #[arg(long)]
        full: bool,
    },
    /// Compare OLFW against the four baselines on a Jester scenario.
    Jester { config: PathBuf },
    /// Fit log-log slopes of regret and violation over the configured T values.
    Scaling { config: PathBuf },
}

/// Global flags shared by every command.
#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub quiet: bool,
}

/// A command failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_USAGE,
            error: error.into(),
        }
    }

    pub fn runtime(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_RUNTIME,
            error: error.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub type CmdResult = Result<(), Failure>;

pub fn dispatch(cli: Cli) -> CmdResult {
    let flags = Flags {
        seed: cli.seed,
        out: cli.out,
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Run { config } => commands::cmd_run(&config, &flags),
        Command::Sweep { config } => commands::cmd_sweep(&config, &flags),
        Command::Check { full } => checks::cmd_check(full, &flags),
        Command::Jester { config } => commands::cmd_jester(&config, &flags),
        Command::Scaling { config } => commands::cmd_scaling(&config, &flags),
    }
}

/// Sizes the global worker pool from `OLFW_THREADS` when set.
pub fn init_threads() -> CmdResult {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        Failure::usage(anyhow::anyhow!(
            "{THREADS_VAR} must be a positive integer, got {v:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(Failure::runtime)
}
