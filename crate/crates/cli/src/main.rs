//! `ghostode`: command-line driver for the ghost-perturbation ODE solver.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure.

mod artifacts;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(ghostode_core::Error),
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numeric(e) => write!(f, "{e}"),
            CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "ghostode", version, about = "Ghost-perturbation ODE solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(short = 'c', long, global = true)]
    config: Option<PathBuf>,
    /// Order override: a single n or lo..hi.
    #[arg(long, global = true)]
    order: Option<String>,
    /// Distance override: d1 or d2.
    #[arg(long, global = true)]
    distance: Option<String>,
    /// Output directory override.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the parameter scans.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Expand at fixed parameters and export the partial sum.
    Expand,
    /// Scan the parameter grid and list polished minima per order.
    Minimize,
    /// Track minima across orders into sequences with asymptotic fits.
    Sequence,
    /// Build the ghost expansion from the per-order optima.
    Ghost,
    /// Apply linearized correction passes to a partial sum.
    Refine,
    /// Piecewise-march an IVP across a long horizon.
    March,
    /// Estimate the critical family parameter from decay slopes.
    Critical,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Expand => "expand",
            Command::Minimize => "minimize",
            Command::Sequence => "sequence",
            Command::Ghost => "ghost",
            Command::Refine => "refine",
            Command::March => "march",
            Command::Critical => "critical",
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(k) = cli.threads {
        // scans fan out through rayon; size its global pool up front
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("missing -c <config>".into()))?;
    let resolved = config::resolve(
        path,
        cli.order.as_deref(),
        cli.distance.as_deref(),
        cli.out.as_deref(),
    )?;
    let start = Instant::now();
    match cli.command {
        Command::Expand => commands::expand_cmd(&resolved)?,
        Command::Minimize => commands::minimize_cmd(&resolved)?,
        Command::Sequence => commands::sequence_cmd(&resolved)?,
        Command::Ghost => commands::ghost_cmd(&resolved)?,
        Command::Refine => commands::refine_cmd(&resolved)?,
        Command::March => commands::march_cmd(&resolved)?,
        Command::Critical => commands::critical_cmd(&resolved)?,
    }
    let manifest = artifacts::manifest_json(
        cli.command.name(),
        &resolved.text,
        start.elapsed().as_millis(),
    );
    artifacts::write_atomic(&resolved.out_dir, "manifest.json", &manifest)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ CliError::Config(_)) => {
            eprintln!("ghostode: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("ghostode: {e}");
            ExitCode::from(2)
        }
    }
}
