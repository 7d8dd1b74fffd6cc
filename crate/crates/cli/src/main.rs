//! `bubblelab`: solve equilibrium asset-price scenarios, classify bubbles,
//! and sweep parameters.
//!
//! Exit codes: 0 success, 1 configuration or I/O errors, 2 solver
//! diagnostics (no-agreement, no-root, regime violation, necessity failure
//! without a relevant path). Every run is fully deterministic: the same
//! config produces byte-identical outputs.

mod config;
mod report;
mod runner;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bubblelab", version, about = "Equilibrium bubble laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario; writes <name>.csv and <name>.verdict.json.
    Run {
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Re-run a scenario over a grid of values for one scalar parameter;
    /// writes <name>.sweep.csv with one verdict row per grid point.
    Sweep {
        config: PathBuf,
        /// Key inside [params] to vary.
        #[arg(long)]
        param: String,
        /// Comma-separated grid values.
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<f64>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out } => run(&config, &out),
        Command::Sweep {
            config,
            param,
            grid,
            out,
        } => sweep(&config, &param, &grid, &out),
    }
}

fn scenario_name(path: &Path, scenario: &config::ScenarioFile) -> String {
    scenario.name.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".to_string())
    })
}

fn run(config_path: &Path, out_dir: &Path) -> Result<ExitCode> {
    let text = fs::read_to_string(config_path)
        .with_context(|| format!("cannot read {}", config_path.display()))?;
    let scenario = config::load(&text)?;
    let name = scenario_name(config_path, &scenario);
    let outcome = runner::execute(&scenario)?;

    fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    if let Some(csv) = &outcome.csv {
        let csv_path = out_dir.join(format!("{name}.csv"));
        fs::write(&csv_path, csv).with_context(|| format!("cannot write {}", csv_path.display()))?;
    }
    let json_path = out_dir.join(format!("{name}.verdict.json"));
    fs::write(&json_path, outcome.report.to_json())
        .with_context(|| format!("cannot write {}", json_path.display()))?;

    let label = outcome
        .report
        .verdict
        .as_ref()
        .map(|v| v.label.clone())
        .unwrap_or_else(|| "-".to_string());
    if outcome.solver_diagnostic {
        println!(
            "{name}: {label} [diagnostics: {}]",
            outcome.report.diagnostics.join("; ")
        );
        Ok(ExitCode::from(2))
    } else {
        println!("{name}: {label}");
        Ok(ExitCode::SUCCESS)
    }
}

fn sweep(config_path: &Path, param: &str, grid: &[f64], out_dir: &Path) -> Result<ExitCode> {
    let text = fs::read_to_string(config_path)
        .with_context(|| format!("cannot read {}", config_path.display()))?;
    let scenario = config::load(&text)?;
    let name = scenario_name(config_path, &scenario);

    let rows = runner::sweep(&text, param, grid)?;
    let csv = runner::sweep_csv(param, &rows);
    fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    let csv_path = out_dir.join(format!("{name}.sweep.csv"));
    fs::write(&csv_path, csv).with_context(|| format!("cannot write {}", csv_path.display()))?;

    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    println!(
        "{name}: swept {} over {} values ({} failed rows)",
        param,
        rows.len(),
        failed
    );
    Ok(ExitCode::SUCCESS)
}
