use std::path::{Path, PathBuf};

use clap::Parser;

use dqpt_core::config::{ExperimentConfig, ALIASES, SCENARIOS};
use dqpt_core::scenario::{run_scenario, RunOptions};
use dqpt_core::{Error, Result};

/// Quench-dynamics simulator for an NV-controlled nuclear-spin register:
/// rate functions, critical times, phase diagrams, entanglement and
/// coupling-estimation runs, written as CSV/JSON (and optionally SVG).
#[derive(Parser)]
#[command(name = "dqpt-sim", version, about)]
struct Cli {
    /// Scenario name, figure alias, or path to a JSON config file.
    /// Scenarios: field-quench, central-quench, sweep, fisher, validate,
    /// entanglement. Aliases: fig2 fig3 fig4 fig5a fig5b fig6 fig8 fig9 fig10.
    target: String,

    /// Output directory (overrides the config's output.dir; default "out")
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads for sweeps (default: all hardware threads)
    #[arg(long)]
    threads: Option<usize>,

    /// Also render SVG plots
    #[arg(long)]
    svg: bool,

    /// Accepted for interface compatibility; every run is deterministic,
    /// with or without this flag
    #[arg(long)]
    seedless: bool,
}

fn load_target(target: &str) -> Result<ExperimentConfig> {
    let path = Path::new(target);
    if path.is_file() {
        return ExperimentConfig::load(path);
    }
    if let Some(preset) = ExperimentConfig::preset(target) {
        return Ok(preset);
    }
    if target.ends_with(".json") || target.contains(std::path::MAIN_SEPARATOR) {
        return Err(Error::Config(format!("config file `{target}` not found")));
    }
    Err(Error::UnknownScenario(format!(
        "{target} (known scenarios: {}; aliases: {})",
        SCENARIOS.join(", "),
        ALIASES.join(", ")
    )))
}

fn main() {
    let cli = Cli::parse();
    let result = load_target(&cli.target).and_then(|config| {
        let out_dir = cli
            .out
            .clone()
            .or_else(|| config.output_dir().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        run_scenario(
            &config,
            &RunOptions { out_dir, threads: cli.threads, svg: cli.svg },
        )
    });
    match result {
        Ok(manifest) => {
            println!(
                "{}: wrote {} file(s) in {:.2} s",
                manifest.scenario,
                manifest.outputs.len() + 1,
                manifest.duration_seconds
            );
            for name in &manifest.outputs {
                println!("  {name}");
            }
            println!("  manifest.json");
        }
        Err(err) => {
            eprintln!("dqpt-sim: {err}");
            std::process::exit(1);
        }
    }
}
