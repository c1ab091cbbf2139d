//! Configured continuum runs and the standard discrete-to-continuum
//! consistency studies.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scenario::read_text;
use crate::bridge::{
    axis_weight_gradient_check, energy_riemann_gap, kirchhoff_consistency, poisson_consistency,
    sample_network_from_fn, uniform_weight_gradient_check, ErrorTable,
};
use crate::energy::{EnergyParams, MetabolicForm};
use crate::error::{Error, Result};
use crate::pde::{
    run_pde, sample_sources, write_snapshots, DiagonalTensorField, GridSpec, PdeConfig, PdeEnergy,
    PdeRun,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    pub cells: usize,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            dim: 2,
            cells: 32,
            lower: None,
            upper: None,
        }
    }
}

impl GridSection {
    pub fn build(&self) -> Result<GridSpec> {
        let lower = self.lower.clone().unwrap_or_else(|| vec![0.0; self.dim]);
        let upper = self.upper.clone().unwrap_or_else(|| vec![1.0; self.dim]);
        GridSpec::new(lower, upper, vec![self.cells; self.dim])
    }
}

/// Initial conductivity components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldInit {
    Constant {
        value: f64,
    },
    /// `value (1 + amplitude · U(−1, 1))` per edge.
    Noisy {
        value: f64,
        amplitude: f64,
        seed: u64,
    },
}

impl Default for FieldInit {
    fn default() -> Self {
        FieldInit::Constant { value: 1.0 }
    }
}

/// Compatible source terms in unit coordinates `x̂ ∈ [0, 1]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SourceSpec {
    /// `A Π_k cos(π x̂_k)`.
    Cosine { amplitude: f64 },
    /// Gaussian source at `x̂_0 = 1/4` and sink at `x̂_0 = 3/4`, centered in
    /// the other direction.
    Dipole { amplitude: f64, width: f64 },
}

impl Default for SourceSpec {
    fn default() -> Self {
        SourceSpec::Cosine { amplitude: 1.0 }
    }
}

impl SourceSpec {
    pub fn sample(&self, grid: &GridSpec) -> Vec<f64> {
        let d = grid.dim();
        let unit =
            |x: [f64; 2], k: usize| (x[k] - grid.lower()[k]) / (grid.upper()[k] - grid.lower()[k]);
        match *self {
            SourceSpec::Cosine { amplitude } => sample_sources(grid, |x| {
                amplitude * (0..d).map(|k| (PI * unit(x, k)).cos()).product::<f64>()
            }),
            SourceSpec::Dipole { amplitude, width } => sample_sources(grid, |x| {
                let bump = |c: f64| {
                    let r2 = (unit(x, 0) - c).powi(2)
                        + (1..d).map(|k| (unit(x, k) - 0.5).powi(2)).sum::<f64>();
                    (-r2 / (width * width)).exp()
                };
                amplitude * (bump(0.25) - bump(0.75))
            }),
        }
    }
}

fn default_background() -> f64 {
    0.1
}

fn default_pde_name() -> String {
    "pde".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeScenario {
    #[serde(default = "default_pde_name")]
    pub name: String,
    #[serde(default)]
    pub grid: GridSection,
    /// Isotropic background permeability `r`.
    #[serde(default = "default_background")]
    pub background: f64,
    #[serde(default)]
    pub pde: PdeConfig,
    #[serde(default)]
    pub initial: FieldInit,
    #[serde(default)]
    pub sources: SourceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Default for PdeScenario {
    fn default() -> Self {
        PdeScenario {
            name: default_pde_name(),
            grid: GridSection::default(),
            background: default_background(),
            pde: PdeConfig::default(),
            initial: FieldInit::default(),
            sources: SourceSpec::default(),
            output: None,
        }
    }
}

impl PdeScenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&read_text(path.as_ref())?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn initial_field(&self, grid: &GridSpec) -> Result<DiagonalTensorField> {
        match self.initial {
            FieldInit::Constant { value } => {
                DiagonalTensorField::from_fn(grid, self.background, |_, _| value)
            }
            FieldInit::Noisy {
                value,
                amplitude,
                seed,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut f = DiagonalTensorField::from_fn(grid, self.background, |_, _| value)?;
                for comp in &mut f.components {
                    for c in comp.iter_mut().filter(|c| **c != 0.0) {
                        *c *= 1.0 + amplitude * rng.gen_range(-1.0..1.0);
                    }
                }
                f.validate(grid)?;
                Ok(f)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PdeReport {
    pub name: String,
    pub steps: usize,
    pub final_time: f64,
    pub initial_energy: PdeEnergy,
    pub final_energy: PdeEnergy,
    pub max_dissipation_excess: f64,
    pub min_conductivity: f64,
    pub wall_clock_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// Runs a continuum scenario; with `output` set, writes `trace.csv`,
/// `report.json`, `config.toml` and the snapshots.
pub fn run_pde_scenario(sc: &PdeScenario) -> Result<(PdeReport, PdeRun)> {
    let start = Instant::now();
    let grid = sc.grid.build()?;
    let initial = sc.initial_field(&grid)?;
    let run = run_pde(&sc.pde, &grid, &initial, &sc.sources.sample(&grid))?;
    let report = PdeReport {
        name: sc.name.clone(),
        steps: run.times.len() - 1,
        final_time: *run.times.last().unwrap_or(&0.0),
        initial_energy: run.energies[0],
        final_energy: *run.energies.last().unwrap_or(&run.energies[0]),
        max_dissipation_excess: run.max_dissipation_excess(),
        min_conductivity: run
            .min_conductivity
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min),
        wall_clock_s: start.elapsed().as_secs_f64(),
        output_dir: sc.output.clone(),
    };
    if let Some(dir) = &sc.output {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("trace.csv"), run.trace_csv())?;
        std::fs::write(dir.join("config.toml"), sc.to_toml()?)?;
        let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(dir.join("report.json"), json)?;
        write_snapshots(dir.join("snapshots"), &run, &grid)?;
    }
    Ok((report, run))
}

/// Results of the standard consistency studies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BridgeReport {
    pub tables: Vec<ErrorTable>,
    pub uniform_weight_deviation: f64,
    pub nonuniform_weight_deviation: f64,
}

fn unit_grids(d: usize, cells: &[usize]) -> Result<Vec<GridSpec>> {
    cells.iter().map(|&n| GridSpec::unit(d, n)).collect()
}

/// Manufactured Poisson and Kirchhoff residuals, energy gaps and both
/// directions of the uniform-weight gradient property.
pub fn bridge_studies() -> Result<BridgeReport> {
    let params = EnergyParams::with_default_alpha(1.5, 1.0, MetabolicForm::OverGamma)?;
    let mut tables = Vec::new();

    let mut t = poisson_consistency(&unit_grids(2, &[8, 16, 32])?)?;
    t.label = "poisson_2d".into();
    tables.push(t);

    let mut t = kirchhoff_consistency(
        &|_, x| 2.0 + (2.0 * PI * x[0]).cos(),
        &|x| (2.0 * PI * x[0]).sin(),
        &unit_grids(1, &[16, 32, 64])?,
    );
    t.label = "kirchhoff_1d".into();
    tables.push(t);

    let mut t = kirchhoff_consistency(
        &|k, x| (1.5 + x[0] * x[0]) * (1.0 + 0.5 * x[1]) + k as f64,
        &|x| (PI * x[0]).sin() * (PI * x[1]).cos(),
        &unit_grids(2, &[8, 16, 32])?,
    );
    t.label = "kirchhoff_2d".into();
    tables.push(t);

    let mut t = energy_riemann_gap(
        &|_, x| 1.0 + x[0] * (1.0 - x[0]),
        Some(&|x| (PI * x[0]).cos()),
        &unit_grids(1, &[8, 16, 32, 64])?,
        &params,
    )?;
    t.label = "energy_gap_1d".into();
    tables.push(t);

    let mut t = energy_riemann_gap(&|_, _| 0.7, None, &unit_grids(2, &[4, 8, 16])?, &params)?;
    t.label = "energy_gap_2d_constant".into();
    tables.push(t);

    let sources = |x: [f64; 2]| 4.0 * (PI * x[0]).cos() * (PI * x[1]).cos();
    let c = |k: usize, x: [f64; 2]| 1.0 + 0.5 * x[0] * x[1] + 0.2 * k as f64;
    let uniform = sample_network_from_fn(c, sources, &GridSpec::unit(2, 4)?)?;
    let skewed = sample_network_from_fn(
        c,
        sources,
        &GridSpec::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![3, 6])?,
    )?;
    Ok(BridgeReport {
        tables,
        uniform_weight_deviation: uniform_weight_gradient_check(&uniform, &params)?,
        nonuniform_weight_deviation: axis_weight_gradient_check(&skewed, &params)?,
    })
}

/// Writes one CSV per table plus `bridge.json`.
pub fn write_bridge_report(dir: &Path, report: &BridgeReport) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for t in &report.tables {
        std::fs::write(dir.join(format!("{}.csv", t.label)), t.to_csv())?;
    }
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(dir.join("bridge.json"), json)?;
    Ok(())
}
