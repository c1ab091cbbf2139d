use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::grid::{DiagonalTensorField, GridSpec};
use super::poisson::{pressure_gradient_sq, solve_poisson_warm, PressureField};
use crate::error::{Error, Result};
use crate::linalg::{self, CsrMatrix};
use crate::prox::scalar_prox;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeScheme {
    /// Forward Euler; requires `Δt ≤ h²/(2 d D²)`.
    Explicit,
    /// Diffusion implicit, reaction explicit.
    SemiImplicit,
    /// Minimizing movement: `c^{n+1} = argmin_{c ≥ 0} E(c) + ‖c − c^n‖²/(2Δt)`.
    /// Satisfies the discrete dissipation inequality for any `Δt`.
    #[default]
    Implicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PdeConfig {
    /// `D²`.
    pub diffusivity: f64,
    pub nu: f64,
    pub gamma: f64,
    pub dt: f64,
    pub final_time: f64,
    pub scheme: TimeScheme,
    pub poisson_tol: f64,
    /// Relative step size at which the implicit inner iteration stops.
    pub inner_tol: f64,
    pub max_inner: usize,
    /// Keep every n-th field; `0` keeps only the initial and final ones.
    pub snapshot_every: usize,
}

impl Default for PdeConfig {
    fn default() -> Self {
        PdeConfig {
            diffusivity: 1e-2,
            nu: 1.0,
            gamma: 1.5,
            dt: 1e-3,
            final_time: 0.05,
            scheme: TimeScheme::Implicit,
            poisson_tol: 1e-10,
            inner_tol: 1e-12,
            max_inner: 5000,
            snapshot_every: 0,
        }
    }
}

impl PdeConfig {
    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.gamma > 1.0) {
            return bad(format!("gamma must exceed 1, got {}", self.gamma));
        }
        if !(self.diffusivity > 0.0) {
            return bad(format!("diffusivity must be > 0, got {}", self.diffusivity));
        }
        if !(self.nu > 0.0) {
            return bad(format!("nu must be > 0, got {}", self.nu));
        }
        if !(self.dt > 0.0) || !(self.final_time >= 0.0) {
            return bad("dt must be > 0 and final_time >= 0".into());
        }
        if self.scheme == TimeScheme::Explicit {
            let limit = self.stability_limit(grid);
            if self.dt > limit {
                return bad(format!(
                    "explicit dt {} exceeds the stability limit {limit}",
                    self.dt
                ));
            }
        }
        Ok(())
    }

    /// `h²/(2 d D²)` with the smallest spacing.
    pub fn stability_limit(&self, grid: &GridSpec) -> f64 {
        grid.min_spacing().powi(2) / (2.0 * grid.dim() as f64 * self.diffusivity)
    }

    pub fn n_steps(&self) -> usize {
        (self.final_time / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PdeEnergy {
    pub diffusion: f64,
    pub pressure: f64,
    pub metabolic: f64,
    pub total: f64,
}

fn laplacians(grid: &GridSpec) -> Vec<CsrMatrix> {
    (0..grid.dim()).map(|k| grid.laplacian(k)).collect()
}

fn diffusion_form(c: &[Vec<f64>], laps: &[CsrMatrix]) -> f64 {
    let mut acc = 0.0;
    for (ck, lk) in c.iter().zip(laps) {
        let mut lc = vec![0.0; ck.len()];
        lk.mul_vec(ck, &mut lc);
        acc -= linalg::dot(ck, &lc);
    }
    acc
}

fn pressure_form(field: &DiagonalTensorField, grad_sq: &[Vec<f64>], grid: &GridSpec) -> f64 {
    let mut acc = 0.0;
    for k in 0..grad_sq.len() {
        for e in 0..grad_sq[k].len() {
            acc += grid.face_fraction(k, e)
                * (field.background[k][e] + field.components[k][e])
                * grad_sq[k][e];
        }
    }
    acc
}

/// Midpoint-rule energy
/// `W^d Σ [ D²/2 |∇_h c|² + (r + c)|∇_h p|² + (ν/γ)|c|^γ ]`, where the
/// diffusion part is `⟨c, −Δ_h c⟩` with the boundary conditions of the
/// field.
pub fn continuum_energy(
    field: &DiagonalTensorField,
    pressure: &PressureField,
    config: &PdeConfig,
    grid: &GridSpec,
) -> PdeEnergy {
    energy_with(field, pressure, config, grid, &laplacians(grid))
}

fn energy_with(
    field: &DiagonalTensorField,
    pressure: &PressureField,
    config: &PdeConfig,
    grid: &GridSpec,
    laps: &[CsrMatrix],
) -> PdeEnergy {
    let w = grid.cell_volume();
    let diffusion = 0.5 * config.diffusivity * w * diffusion_form(&field.components, laps);
    let grad_sq = pressure_gradient_sq(&pressure.values, grid);
    let pressure = w * pressure_form(field, &grad_sq, grid);
    let mu = config.nu / config.gamma;
    let metabolic = w * field
        .components
        .iter()
        .flatten()
        .map(|c| mu * c.abs().powf(config.gamma))
        .sum::<f64>();
    PdeEnergy {
        diffusion,
        pressure,
        metabolic,
        total: diffusion + pressure + metabolic,
    }
}

/// Advances the field by one time step with the configured scheme; the
/// result is clamped at zero and boundary edges stay pinned.
pub fn step_conductivity_field(
    field: &DiagonalTensorField,
    pressure: &PressureField,
    sources: &[f64],
    config: &PdeConfig,
    grid: &GridSpec,
) -> Result<DiagonalTensorField> {
    let mut ctx = StepContext::new(grid);
    ctx.step(field, pressure, sources, config, grid)
}

struct StepContext {
    laps: Vec<CsrMatrix>,
    free: Vec<Vec<bool>>,
    // proximal-gradient step size carried across time steps
    s: f64,
}

impl StepContext {
    fn new(grid: &GridSpec) -> Self {
        let free = (0..grid.dim())
            .map(|k| {
                (0..grid.n_edges(k))
                    .map(|e| !grid.edge_is_pinned(k, e))
                    .collect()
            })
            .collect();
        StepContext {
            laps: laplacians(grid),
            free,
            s: 1.0,
        }
    }

    fn step(
        &mut self,
        field: &DiagonalTensorField,
        pressure: &PressureField,
        sources: &[f64],
        config: &PdeConfig,
        grid: &GridSpec,
    ) -> Result<DiagonalTensorField> {
        let next = match config.scheme {
            TimeScheme::Explicit => self.explicit(field, pressure, config, grid),
            TimeScheme::SemiImplicit => self.semi_implicit(field, pressure, config, grid)?,
            TimeScheme::Implicit => self.implicit(field, pressure, sources, config, grid)?,
        };
        if next.components.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("conductivity field"));
        }
        Ok(next)
    }

    fn reaction(c: f64, g2: f64, config: &PdeConfig) -> f64 {
        // |c|^{γ−2} c is continued by 0 at c = 0
        let decay = if c == 0.0 {
            0.0
        } else {
            c.abs().powf(config.gamma - 2.0) * c
        };
        g2 - config.nu * decay
    }

    fn explicit(
        &self,
        field: &DiagonalTensorField,
        pressure: &PressureField,
        config: &PdeConfig,
        grid: &GridSpec,
    ) -> DiagonalTensorField {
        let g2 = pressure_gradient_sq(&pressure.values, grid);
        let mut out = field.clone();
        for k in 0..grid.dim() {
            let c = &field.components[k];
            let mut lc = vec![0.0; c.len()];
            self.laps[k].mul_vec(c, &mut lc);
            for e in 0..c.len() {
                if self.free[k][e] {
                    let rate = config.diffusivity * lc[e] + Self::reaction(c[e], g2[k][e], config);
                    out.components[k][e] = (c[e] + config.dt * rate).max(0.0);
                }
            }
        }
        out
    }

    fn semi_implicit(
        &self,
        field: &DiagonalTensorField,
        pressure: &PressureField,
        config: &PdeConfig,
        grid: &GridSpec,
    ) -> Result<DiagonalTensorField> {
        let g2 = pressure_gradient_sq(&pressure.values, grid);
        let mut out = field.clone();
        for k in 0..grid.dim() {
            let c = &field.components[k];
            let n = c.len();
            let mut trip = Vec::with_capacity(5 * n);
            for e in 0..n {
                trip.push((e, e, 1.0));
                for (f, v) in self.laps[k].row(e) {
                    trip.push((e, f, -config.dt * config.diffusivity * v));
                }
            }
            let m = CsrMatrix::from_triplets(n, &trip);
            let rhs: Vec<f64> = (0..n)
                .map(|e| {
                    if self.free[k][e] {
                        c[e] + config.dt * Self::reaction(c[e], g2[k][e], config)
                    } else {
                        0.0
                    }
                })
                .collect();
            let mut x = c.clone();
            let tol = 1e-13 * linalg::norm2(&rhs).max(f64::MIN_POSITIVE);
            linalg::pcg(&m, &rhs, &mut x, tol, 20 * n + 1000);
            for e in 0..n {
                out.components[k][e] = if self.free[k][e] { x[e].max(0.0) } else { 0.0 };
            }
        }
        Ok(out)
    }

    // Smooth part S(c) = Σ (r + c)|Dp|² + D²/2 ⟨c, −Δ_h c⟩ (without W^d),
    // its gradient −|Dp|² − D² Δ_h c, and the pressure used.
    fn smooth(
        &self,
        field: &DiagonalTensorField,
        sources: &[f64],
        config: &PdeConfig,
        grid: &GridSpec,
        guess: &[f64],
    ) -> Result<(f64, Vec<Vec<f64>>, PressureField)> {
        let p = solve_poisson_warm(field, sources, grid, config.poisson_tol, Some(guess))?;
        let g2 = pressure_gradient_sq(&p.values, grid);
        let value = pressure_form(field, &g2, grid)
            + 0.5 * config.diffusivity * diffusion_form(&field.components, &self.laps);
        let mut grad = Vec::with_capacity(grid.dim());
        for k in 0..grid.dim() {
            let c = &field.components[k];
            let mut lc = vec![0.0; c.len()];
            self.laps[k].mul_vec(c, &mut lc);
            grad.push(
                (0..c.len())
                    .map(|e| {
                        if self.free[k][e] {
                            -g2[k][e] - config.diffusivity * lc[e]
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            );
        }
        Ok((value, grad, p))
    }

    fn implicit(
        &mut self,
        field: &DiagonalTensorField,
        pressure: &PressureField,
        sources: &[f64],
        config: &PdeConfig,
        grid: &GridSpec,
    ) -> Result<DiagonalTensorField> {
        let dt = config.dt;
        let mu = config.nu / config.gamma;
        let anchor = &field.components;
        let mut x = field.clone();
        let (mut sx, mut gx, mut px) = self.smooth(&x, sources, config, grid, &pressure.values)?;
        for _ in 0..config.max_inner {
            let mut y;
            let mut py;
            let mut sy;
            let mut gy;
            loop {
                let a = 1.0 / self.s + 1.0 / dt;
                y = x.clone();
                for k in 0..grid.dim() {
                    for e in 0..y.components[k].len() {
                        if !self.free[k][e] {
                            continue;
                        }
                        let z = (x.components[k][e] / self.s + anchor[k][e] / dt - gx[k][e]) / a;
                        y.components[k][e] = scalar_prox(z, 1.0 / a, 0.0, mu, config.gamma);
                    }
                }
                let (v, g, p) = self.smooth(&y, sources, config, grid, &px.values)?;
                sy = v;
                gy = g;
                py = p;
                let mut lin = 0.0;
                let mut quad = 0.0;
                for k in 0..grid.dim() {
                    for e in 0..y.components[k].len() {
                        let d = y.components[k][e] - x.components[k][e];
                        lin += gx[k][e] * d;
                        quad += d * d;
                    }
                }
                let bound = sx + lin + quad / (2.0 * self.s) + 1e-14 * sx.abs();
                if sy <= bound || self.s < 1e-30 {
                    break;
                }
                self.s *= 0.5;
            }
            let mut diff = 0.0f64;
            let mut scale = 1.0f64;
            for k in 0..grid.dim() {
                for e in 0..y.components[k].len() {
                    diff = diff.max((y.components[k][e] - x.components[k][e]).abs());
                    scale = scale.max(y.components[k][e].abs());
                }
            }
            x = y;
            sx = sy;
            gx = gy;
            px = py;
            self.s *= 1.25;
            if diff <= config.inner_tol * scale {
                return Ok(x);
            }
        }
        Ok(x)
    }
}

/// Recorded output of [`run_pde`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PdeRun {
    pub times: Vec<f64>,
    pub energies: Vec<PdeEnergy>,
    /// `Σ_{m<n} Δt ‖(c^{m+1} − c^m)/Δt‖²` in the `W^d`-weighted norm.
    pub cumulative_dissipation: Vec<f64>,
    pub min_conductivity: Vec<f64>,
    pub snapshots: Vec<(f64, DiagonalTensorField)>,
    pub final_field: DiagonalTensorField,
    pub final_pressure: PressureField,
}

impl PdeRun {
    /// Largest `(E_n + D_n − E_0)/E_0`; the dissipation inequality with
    /// relative slack `ε` holds when this is `≤ ε`.
    pub fn max_dissipation_excess(&self) -> f64 {
        let e0 = self.energies[0].total;
        self.energies
            .iter()
            .zip(&self.cumulative_dissipation)
            .map(|(e, d)| (e.total + d - e0) / e0.abs().max(f64::MIN_POSITIVE))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_energy_monotone(&self, slack: f64) -> bool {
        self.energies
            .windows(2)
            .all(|w| w[1].total <= w[0].total + slack)
    }

    pub fn trace_csv(&self) -> String {
        let mut s = String::from(
            "step,time,E_total,E_diffusion,E_pressure,E_metabolic,dissipation,min_c\n",
        );
        for n in 0..self.times.len() {
            let e = self.energies[n];
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                n,
                self.times[n],
                e.total,
                e.diffusion,
                e.pressure,
                e.metabolic,
                self.cumulative_dissipation[n],
                self.min_conductivity[n]
            );
        }
        s
    }
}

/// Alternates pressure solves and conductivity steps up to the final time.
pub fn run_pde(
    config: &PdeConfig,
    grid: &GridSpec,
    initial: &DiagonalTensorField,
    sources: &[f64],
) -> Result<PdeRun> {
    config.validate(grid)?;
    initial.validate(grid)?;
    let mut ctx = StepContext::new(grid);
    let w = grid.cell_volume();
    let mut field = initial.clone();
    let mut pressure = solve_poisson_warm(&field, sources, grid, config.poisson_tol, None)?;
    let e0 = energy_with(&field, &pressure, config, grid, &ctx.laps);
    let mut run = PdeRun {
        times: vec![0.0],
        energies: vec![e0],
        cumulative_dissipation: vec![0.0],
        min_conductivity: vec![field.min_value()],
        snapshots: vec![(0.0, field.clone())],
        final_field: field.clone(),
        final_pressure: pressure.clone(),
    };
    let steps = config.n_steps();
    let mut dissipation = 0.0;
    for n in 1..=steps {
        let at = |e: Error| Error::AtIteration {
            iteration: n,
            source: Box::new(e),
        };
        let next = ctx
            .step(&field, &pressure, sources, config, grid)
            .map_err(at)?;
        let moved: f64 = next
            .components
            .iter()
            .flatten()
            .zip(field.components.iter().flatten())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        dissipation += w * moved / config.dt;
        pressure = solve_poisson_warm(
            &next,
            sources,
            grid,
            config.poisson_tol,
            Some(&pressure.values),
        )
        .map_err(at)?;
        field = next;
        let t = n as f64 * config.dt;
        run.times.push(t);
        run.energies
            .push(energy_with(&field, &pressure, config, grid, &ctx.laps));
        run.cumulative_dissipation.push(dissipation);
        run.min_conductivity.push(field.min_value());
        if config.snapshot_every > 0 && n % config.snapshot_every == 0 && n != steps {
            run.snapshots.push((t, field.clone()));
        }
    }
    if steps > 0 {
        run.snapshots
            .push((steps as f64 * config.dt, field.clone()));
    }
    run.final_field = field;
    run.final_pressure = pressure;
    Ok(run)
}

/// Writes one plain-text matrix per component and snapshot, plus
/// `manifest.json` describing the grid and the files.
pub fn write_snapshots(dir: impl AsRef<Path>, run: &PdeRun, grid: &GridSpec) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut entries = Vec::new();
    for (idx, (t, field)) in run.snapshots.iter().enumerate() {
        let mut files = Vec::new();
        for k in 0..grid.dim() {
            let name = format!("snapshot_{idx:04}_c{k}.txt");
            let cols = if k == 0 { grid.cells(0) } else { grid.nodes(0) };
            let mut text = String::new();
            for row in field.components[k].chunks(cols) {
                let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
                text.push_str(&line.join(" "));
                text.push('\n');
            }
            std::fs::write(dir.join(&name), text)?;
            files.push(name);
        }
        entries.push(serde_json::json!({ "index": idx, "time": t, "files": files }));
    }
    let manifest = serde_json::json!({
        "dimension": grid.dim(),
        "lower": grid.lower(),
        "upper": grid.upper(),
        "cells": (0..grid.dim()).map(|k| grid.cells(k)).collect::<Vec<_>>(),
        "spacing": (0..grid.dim()).map(|k| grid.spacing(k)).collect::<Vec<_>>(),
        "layout": "component k is stored at midpoints of axis-k edges; rows run along axis 1, columns along axis 0",
        "snapshots": entries,
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(dir.join("manifest.json"), text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::poisson::sample_sources;
    use std::f64::consts::PI;

    fn cfg(scheme: TimeScheme) -> PdeConfig {
        PdeConfig {
            scheme,
            final_time: 0.02,
            ..Default::default()
        }
    }

    #[test]
    fn zero_everything_has_zero_energy() {
        let g = GridSpec::unit(2, 4).unwrap();
        let f = DiagonalTensorField::zeros(&g, 1.0).unwrap();
        let p = PressureField {
            values: vec![0.0; g.n_nodes()],
            residual: 0.0,
        };
        assert_eq!(
            continuum_energy(&f, &p, &PdeConfig::default(), &g).total,
            0.0
        );
    }

    #[test]
    fn constant_field_metabolic_energy() {
        let kappa: f64 = 2.0;
        let c = PdeConfig::default();
        let mut gaps = Vec::new();
        for n in [8, 16, 32] {
            let g = GridSpec::unit(2, n).unwrap();
            let f = DiagonalTensorField::from_fn(&g, 1.0, |_, _| kappa).unwrap();
            let p = PressureField {
                values: vec![0.0; g.n_nodes()],
                residual: 0.0,
            };
            let e = continuum_energy(&f, &p, &c, &g);
            let want = c.nu / c.gamma * kappa.powf(c.gamma) * 2.0;
            gaps.push((e.metabolic - want).abs());
            let mut c2 = c;
            c2.nu *= 2.0;
            assert_eq!(
                continuum_energy(&f, &p, &c2, &g).metabolic,
                2.0 * e.metabolic
            );
        }
        assert!(
            gaps[1] < 0.6 * gaps[0] && gaps[2] < 0.6 * gaps[1],
            "{gaps:?}"
        );
    }

    #[test]
    fn explicit_stability_is_checked() {
        let g = GridSpec::unit(2, 32).unwrap();
        let mut c = cfg(TimeScheme::Explicit);
        c.diffusivity = 0.1;
        c.dt = 1e-2;
        assert!(c.validate(&g).is_err());
        c.dt = 1e-3;
        assert!(c.validate(&g).is_ok());
        c.scheme = TimeScheme::SemiImplicit;
        c.dt = 1e-2;
        assert!(c.validate(&g).is_ok());
    }

    #[test]
    fn pure_decay_without_sources() {
        let g = GridSpec::unit(2, 8).unwrap();
        let f = DiagonalTensorField::from_fn(&g, 1.0, |k, x| 1.0 + x[0] + k as f64 * x[1]).unwrap();
        let s = vec![0.0; g.n_nodes()];
        for scheme in [
            TimeScheme::Explicit,
            TimeScheme::SemiImplicit,
            TimeScheme::Implicit,
        ] {
            let run = run_pde(&cfg(scheme), &g, &f, &s).unwrap();
            let norms: Vec<f64> = run
                .snapshots
                .iter()
                .map(|(_, f)| f.components.iter().flatten().map(|v| v * v).sum::<f64>())
                .collect();
            assert!(norms.windows(2).all(|w| w[1] < w[0]), "{scheme:?}");
            assert!(run.is_energy_monotone(0.0), "{scheme:?}");
        }
    }

    #[test]
    fn production_where_pressure_varies() {
        let g = GridSpec::unit(1, 16).unwrap();
        let f = DiagonalTensorField::zeros(&g, 1.0).unwrap();
        let s = sample_sources(&g, |x| PI * PI * (PI * x[0]).cos());
        let p = solve_poisson_warm(&f, &s, &g, 1e-12, None).unwrap();
        for scheme in [
            TimeScheme::Explicit,
            TimeScheme::SemiImplicit,
            TimeScheme::Implicit,
        ] {
            let next = step_conductivity_field(&f, &p, &s, &cfg(scheme), &g).unwrap();
            assert!(next.components[0].iter().all(|&v| v > 0.0), "{scheme:?}");
        }
    }

    #[test]
    fn implicit_dissipation_inequality() {
        let g = GridSpec::unit(2, 12).unwrap();
        let f = DiagonalTensorField::from_fn(&g, 1.0, |k, x| {
            0.5 + (3.0 * x[0] + k as f64).sin().abs() * x[1]
        })
        .unwrap();
        let s = sample_sources(&g, |x| {
            2.0 * PI * PI * (PI * x[0]).cos() * (PI * x[1]).cos()
        });
        let run = run_pde(&cfg(TimeScheme::Implicit), &g, &f, &s).unwrap();
        assert!(
            run.max_dissipation_excess() <= 1e-8,
            "{}",
            run.max_dissipation_excess()
        );
        assert!(run.min_conductivity.iter().all(|&m| m >= 0.0));
    }

    #[test]
    fn identical_inputs_identical_traces() {
        let g = GridSpec::unit(2, 6).unwrap();
        let f = DiagonalTensorField::from_fn(&g, 1.0, |_, x| x[0] * x[1] + 0.1).unwrap();
        let s = sample_sources(&g, |x| (PI * x[0]).cos());
        let a = run_pde(&cfg(TimeScheme::Implicit), &g, &f, &s).unwrap();
        let b = run_pde(&cfg(TimeScheme::Implicit), &g, &f, &s).unwrap();
        assert_eq!(a.trace_csv(), b.trace_csv());
    }

    #[test]
    fn snapshot_files() {
        let g = GridSpec::unit(2, 4).unwrap();
        let f = DiagonalTensorField::from_fn(&g, 1.0, |_, _| 1.0).unwrap();
        let s = vec![0.0; g.n_nodes()];
        let mut c = cfg(TimeScheme::Implicit);
        c.snapshot_every = 5;
        let run = run_pde(&c, &g, &f, &s).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_snapshots(dir.path(), &run, &g).unwrap();
        let manifest: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("manifest.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(
            manifest["snapshots"].as_array().unwrap().len(),
            run.snapshots.len()
        );
        let m = std::fs::read_to_string(dir.path().join("snapshot_0000_c1.txt")).unwrap();
        assert_eq!(m.lines().count(), 4);
        assert_eq!(m.lines().next().unwrap().split(' ').count(), 5);
    }
}
