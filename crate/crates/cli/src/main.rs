use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bionet::experiments::{
    assign_output_dirs, bridge_studies, run_pde_scenario, run_scenario, sweep, write_bridge_report,
    FieldInit, GeometrySpec, PdeScenario, Preset, ScenarioConfig, SweepConfig,
};
use bionet::Error;
use clap::{Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "bionet",
    version,
    about = "Adaptation of transport networks: discrete runs, sweeps, continuum runs and consistency studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one network scenario
    Run {
        /// Scenario TOML file
        #[arg(long)]
        config: Option<PathBuf>,
        /// Geometry preset, overriding the config (paper-diamond, small-diamond[:n])
        #[arg(long)]
        preset: Option<Preset>,
        /// Metabolic exponent when no config is given
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        /// Seed for tree generation or noise
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for the artifacts
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every [[scenario]] of a sweep file
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        preset: Option<Preset>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; 0 uses every core
        #[arg(long, default_value_t = 0)]
        parallel: usize,
    },
    /// Run the continuum model on a grid
    Pde {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Seed for a noisy initial field
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the discrete-to-continuum consistency studies
    Bridge {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn fail(err: &Error) -> ExitCode {
    let report = json!({ "status": "error", "kind": err.kind(), "error": err.to_string() });
    eprintln!("{report}");
    ExitCode::from(2)
}

fn print(value: &impl serde::Serialize) {
    // A closed pipe (e.g. `| head`) is not an error for the run itself.
    let _ = writeln!(
        std::io::stdout().lock(),
        "{}",
        serde_json::to_string_pretty(value).unwrap_or_default()
    );
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Run {
            config,
            preset,
            gamma,
            seed,
            out,
        } => {
            let mut cfg = match config {
                Some(path) => ScenarioConfig::read(path)?,
                None => ScenarioConfig::new(gamma),
            };
            if let Some(preset) = preset {
                cfg.geometry = GeometrySpec::Preset { preset };
            }
            if let Some(seed) = seed {
                cfg.init.set_seed(seed);
            }
            if out.is_some() {
                cfg.output = out;
            }
            let report = run_scenario(&cfg)?;
            print(&report);
            if let Some(msg) = &report.error {
                eprintln!(
                    "{}",
                    json!({ "status": "error", "kind": "dynamics", "error": msg })
                );
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            config,
            preset,
            seed,
            out,
            parallel,
        } => {
            let mut scenarios = SweepConfig::read(config)?.scenarios;
            for cfg in &mut scenarios {
                if let Some(preset) = preset {
                    cfg.geometry = GeometrySpec::Preset { preset };
                }
                if let Some(seed) = seed {
                    cfg.init.set_seed(seed);
                }
            }
            if let Some(out) = &out {
                assign_output_dirs(&mut scenarios, out);
            }
            let reports = sweep(&scenarios, parallel)?;
            if let Some(out) = &out {
                let text =
                    serde_json::to_string_pretty(&reports).map_err(|e| Error::Io(e.to_string()))?;
                std::fs::write(out.join("sweep.json"), text)?;
            }
            print(&reports);
            let failed = reports.iter().filter(|r| !r.is_ok()).count();
            if failed > 0 {
                eprintln!(
                    "{}",
                    json!({ "status": "error", "kind": "sweep", "failed": failed, "total": reports.len() })
                );
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Pde { config, seed, out } => {
            let mut sc = match config {
                Some(path) => PdeScenario::read(path)?,
                None => PdeScenario::default(),
            };
            if let (Some(s), FieldInit::Noisy { seed, .. }) = (seed, &mut sc.initial) {
                *seed = s;
            }
            if out.is_some() {
                sc.output = out;
            }
            let (report, _) = run_pde_scenario(&sc)?;
            print(&report);
            Ok(ExitCode::SUCCESS)
        }
        Command::Bridge { out } => {
            let report = bridge_studies()?;
            if let Some(out) = &out {
                write_bridge_report(out, &report)?;
            }
            print(&report);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    run(cli.command).unwrap_or_else(|e| fail(&e))
}
