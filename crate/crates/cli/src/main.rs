#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::{CommandFactory, Parser};
use serde_json::{json, Value};

use commands::Command;
use config::ExperimentConfig;

/// Brownian motion among soft traps on hyperbolic space: sampling, survival
/// estimates, spectral oracles.
#[derive(Parser, Debug)]
#[command(name = "hypertrap", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Flat TOML configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    if cfg.workers == Some(0) {
        anyhow::bail!("workers must be at least 1");
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<Vec<String>> {
    let cfg = load(cli)?;
    let started = Instant::now();
    let outcome = hypertrap::par::with_workers(cfg.workers, || commands::run(cli.command, &cfg))?;
    let wall = started.elapsed().as_secs_f64();

    let mut manifest = serde_json::Map::new();
    manifest.insert("tool".into(), json!("hypertrap"));
    manifest.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    manifest.insert("command".into(), json!(cli.command.name()));
    manifest.insert("seed".into(), json!(cfg.seed));
    manifest.insert("regime".into(), serde_json::to_value(cfg.regime())?);
    manifest.insert("config".into(), serde_json::to_value(&cfg)?);
    manifest.insert(
        "streams".into(),
        json!({
            "ppp": commands::streams::PPP,
            "paths": commands::streams::PATHS,
            "rho": commands::streams::RHO,
            "phi": commands::streams::PHI,
            "q": commands::streams::Q,
            "doob": commands::streams::DOOB,
            "fock": commands::streams::FOCK,
            "smc": commands::streams::SMC,
            "annealed": commands::streams::ANNEALED,
        }),
    );
    output::write_outputs(&cfg.out, &outcome, manifest)?;
    let timing = json!({
        "command": cli.command.name(),
        "wall_seconds": wall,
        "workers": cfg.workers,
        "parallel": hypertrap::par::parallel_enabled(),
    });
    std::fs::write(cfg.out.join("timing.json"), serde_json::to_string_pretty(&timing)? + "\n")?;

    let summary = Value::Object(outcome.results.clone());
    println!("{}", serde_json::to_string_pretty(&summary)?);
    eprintln!("wrote {} files to {} in {wall:.2} s", outcome.tables.len() + outcome.files.len() + 2, cfg.out.display());
    Ok(outcome.failed_checks)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            eprintln!("{}", Cli::command().render_long_help());
            eprint!("{e}");
            return ExitCode::from(2);
        }
    };
    match execute(&cli) {
        Ok(failed) if failed.is_empty() => ExitCode::SUCCESS,
        Ok(failed) => {
            for f in failed {
                eprintln!("check failed: {f}");
            }
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
