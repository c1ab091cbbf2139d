//! Scenario configuration, execution and report emission.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::geometry::{build_sources, generate_diamond, Preset};
use super::init::{init_conductivities, InitSpec};
use crate::dynamics::{
    run_recording, ArmijoParams, DynamicsConfig, StepMode, Termination, Trajectory,
};
use crate::energy::{EnergyBreakdown, EnergyParams, MetabolicForm};
use crate::error::{Error, Result};
use crate::graph::{cycle_count, Network};
use crate::kirchhoff::LengthExponent;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeometrySpec {
    Preset { preset: Preset },
    File { file: PathBuf },
}

impl Default for GeometrySpec {
    fn default() -> Self {
        GeometrySpec::Preset {
            preset: Preset::PaperDiamond,
        }
    }
}

impl GeometrySpec {
    pub fn build(&self) -> Result<Network> {
        match self {
            GeometrySpec::Preset { preset } => generate_diamond(*preset),
            GeometrySpec::File { file } => Network::read(file),
        }
    }
}

fn default_nu() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergySection {
    pub gamma: f64,
    #[serde(default = "default_nu")]
    pub nu: f64,
    /// Defaults to `2 − γ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default = "plain")]
    pub form: MetabolicForm,
}

fn plain() -> MetabolicForm {
    MetabolicForm::Plain
}

impl EnergySection {
    pub fn params(&self) -> Result<EnergyParams> {
        let alpha = self.alpha.unwrap_or(2.0 - self.gamma);
        EnergyParams::new(self.gamma, self.nu, alpha, self.form)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsSection {
    pub tau: f64,
    pub tol: f64,
    pub prune_threshold: f64,
    pub max_iters: usize,
    pub mode: StepMode,
    pub length_exponent: LengthExponent,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_tol: Option<f64>,
    pub armijo: ArmijoParams,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        DynamicsSection {
            tau: 0.025,
            tol: 1e-6,
            prune_threshold: 1e-12,
            max_iters: 100_000,
            mode: StepMode::Proximal,
            length_exponent: LengthExponent::Two,
            step_tol: None,
            rate_tol: None,
            armijo: ArmijoParams::default(),
        }
    }
}

/// One simulation: geometry, energy, dynamics, initial data and where to
/// write the artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub geometry: GeometrySpec,
    pub energy: EnergySection,
    #[serde(default)]
    pub dynamics: DynamicsSection,
    #[serde(default)]
    pub init: InitSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn default_name() -> String {
    "scenario".into()
}

impl ScenarioConfig {
    /// Paper-diamond geometry, tree initialization and default dynamics.
    pub fn new(gamma: f64) -> Self {
        ScenarioConfig {
            name: default_name(),
            geometry: GeometrySpec::default(),
            energy: EnergySection {
                gamma,
                nu: 1.0,
                alpha: None,
                form: MetabolicForm::Plain,
            },
            dynamics: DynamicsSection::default(),
            init: InitSpec::default(),
            output: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; a relative geometry path is resolved against the
    /// directory of the file.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::from_toml(&read_text(path)?)?;
        cfg.resolve_paths(path.parent());
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: Option<&Path>) {
        if let (GeometrySpec::File { file }, Some(base)) = (&mut self.geometry, base) {
            if file.is_relative() {
                *file = base.join(&*file);
            }
        }
    }

    pub fn dynamics_config(&self) -> Result<DynamicsConfig> {
        let d = &self.dynamics;
        let cfg = DynamicsConfig {
            tau: d.tau,
            tol: d.tol,
            prune_threshold: d.prune_threshold,
            max_iters: d.max_iters,
            mode: d.mode,
            armijo: d.armijo,
            exponent: d.length_exponent,
            step_tol: d.step_tol,
            rate_tol: d.rate_tol,
            ..DynamicsConfig::new(self.energy.params()?)
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.dynamics_config()?;
        self.init.validate()?;
        if let GeometrySpec::File { file } = &self.geometry {
            if !file.is_file() {
                return Err(Error::Config(format!(
                    "network file {} does not exist",
                    file.display()
                )));
            }
        }
        Ok(())
    }
}

/// A list of scenarios read from `[[scenario]]` tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(rename = "scenario")]
    pub scenarios: Vec<ScenarioConfig>,
}

impl SweepConfig {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg: SweepConfig =
            toml::from_str(&read_text(path)?).map_err(|e| Error::Config(e.to_string()))?;
        for s in &mut cfg.scenarios {
            s.resolve_paths(path.parent());
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Classification {
    Tree,
    Network { cycles: usize },
}

impl Classification {
    pub fn of(network: &Network, threshold: f64) -> Self {
        match cycle_count(network, threshold) {
            0 => Classification::Tree,
            cycles => Classification::Network { cycles },
        }
    }

    pub fn cycles(&self) -> usize {
        match self {
            Classification::Tree => 0,
            Classification::Network { cycles } => *cycles,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub iterations: usize,
    pub termination: Termination,
    pub initial_energy: EnergyBreakdown,
    pub final_energy: EnergyBreakdown,
    pub prune_events: usize,
}

impl TrajectorySummary {
    fn of(traj: &Trajectory) -> Self {
        TrajectorySummary {
            iterations: traj.iterations(),
            termination: traj.termination.clone(),
            initial_energy: traj.records.first().map(|r| r.energy).unwrap_or_default(),
            final_energy: traj.final_energy(),
            prune_events: traj.prune_events.len(),
        }
    }
}

/// Outcome of one scenario. A failed scenario carries `error` and no
/// network.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    #[serde(skip)]
    pub final_network: Option<Network>,
    pub final_conductivities: Vec<f64>,
    pub summary: Option<TrajectorySummary>,
    pub classification: Option<Classification>,
    pub active_edges: usize,
    pub max_conductivity: f64,
    pub wall_clock_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Report {
    pub fn failed(name: &str, err: &Error, wall_clock_s: f64) -> Self {
        Report {
            name: name.to_string(),
            final_network: None,
            final_conductivities: Vec::new(),
            summary: None,
            classification: None,
            active_edges: 0,
            max_conductivity: 0.0,
            wall_clock_s,
            output_dir: None,
            error: Some(err.to_string()),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    /// Indices of edges above `threshold` in the final state.
    pub fn support(&self, threshold: f64) -> Vec<usize> {
        (0..self.final_conductivities.len())
            .filter(|&k| self.final_conductivities[k] > threshold)
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }
}

/// Everything a scenario run produces, before artifacts are written.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub report: Report,
    pub trajectory: Trajectory,
}

/// Runs one scenario and writes its artifacts when `output` is set.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Report> {
    Ok(execute_scenario(config)?.report)
}

/// Runs one scenario and keeps the full trajectory.
///
/// A failure inside the dynamics does not abort: the report records the
/// error and the artifacts of the partial trajectory are still written.
pub fn execute_scenario(config: &ScenarioConfig) -> Result<ScenarioRun> {
    let start = Instant::now();
    config.validate()?;
    let dyn_cfg = config.dynamics_config()?;
    let base = config.geometry.build()?;
    let sources = build_sources(&base)?;
    let initial = init_conductivities(&base, &config.init)?;
    let trajectory = run_recording(&initial, &sources, &dyn_cfg);
    let net = trajectory.final_network.clone();
    let threshold = dyn_cfg.prune_threshold;
    let conductivities = net.conductivities();
    let error = match &trajectory.termination {
        Termination::Error { message, .. } => Some(message.clone()),
        _ => None,
    };
    let mut report = Report {
        name: config.name.clone(),
        classification: Some(Classification::of(&net, threshold)),
        active_edges: net.active_edges(threshold).len(),
        max_conductivity: conductivities.iter().cloned().fold(0.0, f64::max),
        final_conductivities: conductivities,
        summary: Some(TrajectorySummary::of(&trajectory)),
        final_network: Some(net),
        wall_clock_s: 0.0,
        output_dir: config.output.clone(),
        error,
    };
    report.wall_clock_s = start.elapsed().as_secs_f64();
    if let Some(dir) = &config.output {
        write_artifacts(dir, config, &report, &trajectory)?;
    }
    Ok(ScenarioRun { report, trajectory })
}

/// Edge segments with a line width proportional to the conductivity.
pub fn plot_data(network: &Network) -> String {
    let cmax = network.conductivities().iter().cloned().fold(0.0, f64::max);
    let pos = network.positions();
    let mut out = String::from("edge,x1,y1,x2,y2,conductivity,width\n");
    for (k, e) in network.edges().iter().enumerate() {
        let width = if cmax > 0.0 {
            e.conductivity / cmax
        } else {
            0.0
        };
        let (a, b) = (pos[e.i], pos[e.j]);
        let _ = writeln!(
            out,
            "{k},{},{},{},{},{},{width}",
            a[0], a[1], b[0], b[1], e.conductivity
        );
    }
    out
}

/// Writes `trajectory.csv`, `network.txt`, `plot.csv`, `config.toml` and
/// `report.json` into `dir`.
pub fn write_artifacts(
    dir: &Path,
    config: &ScenarioConfig,
    report: &Report,
    traj: &Trajectory,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    traj.write_csv(dir.join("trajectory.csv"))?;
    traj.final_network.write(dir.join("network.txt"))?;
    std::fs::write(dir.join("plot.csv"), plot_data(&traj.final_network))?;
    std::fs::write(dir.join("config.toml"), config.to_toml()?)?;
    std::fs::write(dir.join("report.json"), report.to_json())?;
    Ok(())
}

/// Runs scenarios on a pool of `parallel` threads (all cores when 0). The
/// result order follows the input order; failures become error reports.
pub fn sweep(configs: &[ScenarioConfig], parallel: usize) -> Result<Vec<Report>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(|| {
        configs
            .par_iter()
            .map(|cfg| {
                let start = Instant::now();
                run_scenario(cfg).unwrap_or_else(|e| {
                    Report::failed(&cfg.name, &e, start.elapsed().as_secs_f64())
                })
            })
            .collect()
    }))
}

/// Gives every scenario its own directory `out/NNN_name`.
pub fn assign_output_dirs(configs: &mut [ScenarioConfig], out: &Path) {
    for (i, cfg) in configs.iter_mut().enumerate() {
        let safe: String = cfg
            .name
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                    c
                } else {
                    '_'
                }
            })
            .collect();
        cfg.output = Some(out.join(format!("{i:03}_{safe}")));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_toml_uses_defaults() {
        let cfg = ScenarioConfig::from_toml("[energy]\ngamma = 0.5\n").unwrap();
        assert_eq!(cfg.energy.nu, 1.0);
        assert_eq!(cfg.dynamics.tau, 0.025);
        assert_eq!(cfg.dynamics.tol, 1e-6);
        let p = cfg.energy.params().unwrap();
        assert!((p.alpha - 1.5).abs() < 1e-15);
        assert_eq!(cfg.geometry, GeometrySpec::default());
        assert_eq!(cfg.init, InitSpec::default());
    }

    #[test]
    fn full_toml_round_trips() {
        let text = r#"
name = "loops"
[geometry]
preset = "small-diamond:25"
[energy]
gamma = 1.5
nu = 2.0
alpha = 0.5
form = "over-gamma"
[dynamics]
tau = 0.01
length_exponent = 1
mode = "explicit"
rate_tol = 1e-3
[init]
kind = "tree"
delta = 100.0
loops = 2
seed = 9
"#;
        let cfg = ScenarioConfig::from_toml(text).unwrap();
        assert_eq!(
            cfg.geometry,
            GeometrySpec::Preset {
                preset: Preset::SmallDiamond(25)
            }
        );
        assert_eq!(cfg.dynamics.length_exponent, LengthExponent::One);
        assert_eq!(cfg.dynamics.mode, StepMode::Explicit);
        let back = ScenarioConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ScenarioConfig::from_toml("[energy]\ngamma = 0.5\nmu = 3\n").is_err());
        assert!(
            ScenarioConfig::from_toml("[energy]\ngamma = 0.5\n[init]\nkind = \"star\"\n").is_err()
        );
        let cfg = ScenarioConfig::from_toml("[energy]\ngamma = -1.0\n").unwrap();
        assert!(cfg.validate().is_err());
        let cfg = ScenarioConfig::from_toml(
            "[geometry]\nfile = \"/nonexistent/net.txt\"\n[energy]\ngamma = 1.0\n",
        )
        .unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn sweep_records_failures_in_order() {
        let mut good = ScenarioConfig::new(1.5);
        good.name = "good".into();
        good.geometry = GeometrySpec::Preset {
            preset: Preset::SmallDiamond(9),
        };
        good.dynamics.max_iters = 5;
        let mut bad = good.clone();
        bad.name = "bad".into();
        bad.dynamics.tau = -1.0;
        let reports = sweep(&[bad, good], 2).unwrap();
        assert_eq!(reports[0].name, "bad");
        assert!(!reports[0].is_ok());
        assert_eq!(reports[1].name, "good");
        assert!(reports[1].is_ok());
    }
}
