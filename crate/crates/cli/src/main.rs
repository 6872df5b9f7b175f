//! Command-line front end for the frozen-argument Sturm–Liouville solvers.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};
use frozen_sl::tolerances::Tolerances;
use serde::Serialize;

use config::Loaded;

#[derive(Parser)]
#[command(name = "frozen-sl", version, about = "Forward and inverse spectral problems with a frozen argument")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Truncation, overriding `N` in `[run]`.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Output directory, created if absent.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Recover even when the spectrum fails the admissibility checks.
    #[arg(long)]
    force: bool,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    Forward,
    Inverse,
    Validate,
    Isospectral,
    BasisInfo,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: Command,
    version: &'static str,
    config_path: &'a Path,
    input_paths: &'a [PathBuf],
    output_dir: &'a Path,
    #[serde(rename = "N")]
    n: usize,
    tolerances: Tolerances,
    threads: usize,
    admissible: bool,
    timestamp: u64,
}

/// Sizes the global pool from `FROZEN_SL_THREADS`.
fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("FROZEN_SL_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .with_context(|| format!("FROZEN_SL_THREADS = `{v}` is not a positive integer"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    init_threads()?;
    let loaded = Loaded::read(&cli.config)?;
    std::fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let outcome = match cli.command {
        Command::Forward => commands::forward(&loaded, cli.n, &cli.out),
        Command::Inverse => commands::inverse(&loaded, cli.n, cli.force, &cli.out),
        Command::Validate => commands::validate(&loaded, cli.n, &cli.out),
        Command::Isospectral => commands::isospectral(&loaded, cli.n, &cli.out),
        Command::BasisInfo => commands::basis_info(&loaded, cli.n, &cli.out),
    }?;
    let manifest = Manifest {
        command: cli.command,
        version: env!("CARGO_PKG_VERSION"),
        config_path: &cli.config,
        input_paths: &outcome.inputs,
        output_dir: &cli.out,
        n: outcome.n,
        tolerances: loaded.tolerances(),
        threads: rayon::current_num_threads(),
        admissible: outcome.admissible,
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(cli.out.join("manifest.json"), text)?;
    Ok(outcome.admissible)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("spectrum is not admissible; see validation.json");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
