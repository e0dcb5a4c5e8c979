//! `hodgehalf` command-line driver.
//!
//! Exit codes: 0 when every check passes, 1 on a tolerance violation,
//! 2 on a configuration or input error, 3 on a numerical failure.

mod commands;
mod config;
mod corpus;
mod report;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use config::{Command, RunConfig};

/// Invalid configuration, flags or input files.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Parser, Debug)]
#[command(name = "hodgehalf", version, about = "Spectral Hodge calculus on the half-space")]
struct Cli {
    /// verify, decompose, solve, maxreg or normtable; overrides the config.
    command: Option<String>,

    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Restrict `verify` to these suites (repeatable).
    #[arg(long = "suite")]
    suites: Vec<String>,

    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Offset added to every corpus seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Multiplies residual tolerances and the excess over 1 of spread limits.
    #[arg(long)]
    tol_scale: Option<f64>,
}

/// Outcome of a command that ran to completion.
pub enum Status {
    Passed,
    Violations,
}

fn resolve(cli: Cli) -> Result<(Command, RunConfig, u64)> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(name) = &cli.command {
        cfg.command = Some(name.parse()?);
    }
    if !cli.suites.is_empty() {
        cfg.suites = cli.suites;
    }
    if let Some(out) = cli.out {
        cfg.out = out;
    }
    if let Some(factor) = cli.tol_scale {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(ConfigError(format!("--tol-scale must be positive, got {factor}")).into());
        }
        cfg.tolerances = cfg.tolerances.scaled(factor);
    }
    cfg.validate()?;
    let command = cfg
        .command
        .ok_or_else(|| ConfigError("no command given on the command line or in the config".into()))?;
    Ok((command, cfg, cli.seed))
}

fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var("HODGEHALF_THREADS") {
        let threads: usize = value
            .parse()
            .map_err(|_| ConfigError(format!("HODGEHALF_THREADS must be an integer, got `{value}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("thread pool")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Status> {
    configure_threads()?;
    let (command, cfg, seed) = resolve(cli)?;
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    match command {
        Command::Verify => commands::verify(&cfg, seed),
        Command::Decompose => commands::decompose(&cfg, seed),
        Command::Solve => commands::solve(&cfg, seed),
        Command::Maxreg => commands::maxreg(&cfg, seed),
        Command::Normtable => commands::normtable(&cfg, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Passed) => ExitCode::SUCCESS,
        Ok(Status::Violations) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            let config = err.chain().any(|e| e.is::<ConfigError>() || e.is::<std::io::Error>());
            let input = matches!(
                err.downcast_ref::<hodgehalf::Error>(),
                Some(hodgehalf::Error::Format(_) | hodgehalf::Error::Io(_))
            );
            ExitCode::from(if config || input { 2 } else { 3 })
        }
    }
}
