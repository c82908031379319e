// SPDX-License-Identifier: MIT OR Apache-2.0

use clap::{Parser, Subcommand};
use dielectric_cluster::cli::{convergence_study, run_scenario, ScenarioConfig, Stage};
use dielectric_cluster::Result;
use std::path::PathBuf;
use std::process::ExitCode;

/// Point-interaction scattering by clusters of resonant dielectric particles.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also run the volume solver.
    #[arg(long, global = true)]
    oracle: bool,
    /// Volume-solver resolution; overrides `oracle.resolution`.
    #[arg(long, global = true)]
    resolution: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Spectral families of the reference shape.
    Eigens,
    /// Resonance tuning report.
    Tune,
    /// Regime and geometry checks.
    Validate,
    /// Point-interaction solve.
    Solve,
    /// Far-field pattern.
    Farfield,
    /// Far field with the volume solver and the discrepancy.
    Oracle,
    /// Discrepancy across `sweep.a`.
    Converge,
}

fn run(cli: &Cli) -> Result<String> {
    let path = cli.config.clone().ok_or(dielectric_cluster::Error::Config { line: 0, msg: "--config is required".into() })?;
    let mut cfg = ScenarioConfig::load(&path)?;
    if cli.oracle {
        cfg.oracle.enabled = true;
    }
    if let Some(n) = cli.resolution {
        cfg.oracle.resolution = n;
    }
    let out = cli.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    let stage = match cli.command {
        Command::Eigens => Stage::Eigens,
        Command::Tune => Stage::Tune,
        Command::Validate => Stage::Validate,
        Command::Solve => Stage::Solve,
        Command::Farfield => Stage::FarField,
        Command::Oracle => Stage::Oracle,
        Command::Converge => {
            let sweep = if cfg.sweep.a.is_empty() { vec![cfg.physics.a] } else { cfg.sweep.a.clone() };
            return convergence_study(&cfg, &sweep, &out);
        }
    };
    run_scenario(&cfg, stage, &out)
}

/// Re-runs the binary with the OpenBLAS kernel pinned when the caller has not chosen one.
fn pinned_kernel() -> Option<ExitCode> {
    if std::env::var_os("OPENBLAS_CORETYPE").is_some() {
        return None;
    }
    let exe = std::env::current_exe().ok()?;
    let status = std::process::Command::new(exe).args(std::env::args_os().skip(1)).env("OPENBLAS_CORETYPE", "Haswell").status().ok()?;
    Some(ExitCode::from(status.code().unwrap_or(1) as u8))
}

fn main() -> ExitCode {
    if let Some(code) = pinned_kernel() {
        return code;
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
