//! Discrete transport energy, its gradient with respect to the
//! conductivities, and the dissipation rate of the gradient flow.
//!
//! The energy is `Σ (Q²/C + μ C^γ) L` with `μ = ν/γ` or `μ = ν` depending on
//! [`MetabolicForm`]. Writing `ν' = μγ`, the gradient reads
//! `∂E/∂C = −(Q²/C² − ν' C^{γ−1}) L`. The pumping part of this derivative is
//! exact when the pressure solve uses weights `C/L` (length exponent 1), or
//! when all edge lengths are equal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Network, SourceVector};
use crate::kirchhoff::{solve_pressures, PressureState, SolveOptions};

/// Prefactor of the metabolic term `μ C^γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetabolicForm {
    /// `μ = ν/γ`; the gradient carries `ν C^{γ−1}`.
    #[default]
    OverGamma,
    /// `μ = ν`; the gradient carries `νγ C^{γ−1}`.
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    pub gamma: f64,
    pub nu: f64,
    pub alpha: f64,
    #[serde(default)]
    pub form: MetabolicForm,
}

impl EnergyParams {
    pub fn new(gamma: f64, nu: f64, alpha: f64, form: MetabolicForm) -> Result<Self> {
        let p = EnergyParams {
            gamma,
            nu,
            alpha,
            form,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with `α = 2 − γ`.
    pub fn with_default_alpha(gamma: f64, nu: f64, form: MetabolicForm) -> Result<Self> {
        Self::new(gamma, nu, 2.0 - gamma, form)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be > 0, got {}",
                self.gamma
            )));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "nu must be > 0, got {}",
                self.nu
            )));
        }
        if !(self.alpha > 1.0 - self.gamma && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must exceed 1 - gamma = {}, got {}",
                1.0 - self.gamma,
                self.alpha
            )));
        }
        Ok(())
    }

    /// Coefficient `μ` of `C^γ L` in the energy.
    pub fn metabolic_coefficient(&self) -> f64 {
        match self.form {
            MetabolicForm::OverGamma => self.nu / self.gamma,
            MetabolicForm::Plain => self.nu,
        }
    }

    /// Coefficient `ν' = μγ` of `C^{γ−1} L` in the gradient.
    pub fn gradient_coefficient(&self) -> f64 {
        self.metabolic_coefficient() * self.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub pumping: f64,
    pub metabolic: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(pumping: f64, metabolic: f64) -> Self {
        EnergyBreakdown {
            pumping,
            metabolic,
            total: pumping + metabolic,
        }
    }
}

/// Energy of a network whose fluxes are already known.
///
/// Edges with `C = 0` contribute nothing to the pumping term.
pub fn energy_from_fluxes(
    network: &Network,
    fluxes: &[f64],
    params: &EnergyParams,
) -> EnergyBreakdown {
    let mu = params.metabolic_coefficient();
    let mut pumping = 0.0;
    let mut metabolic = 0.0;
    for (e, &q) in network.edges().iter().zip(fluxes) {
        if e.conductivity > 0.0 {
            pumping += q * q / e.conductivity * e.length;
            metabolic += mu * e.conductivity.powf(params.gamma) * e.length;
        }
    }
    EnergyBreakdown::new(pumping, metabolic)
}

/// Solves the pressures and evaluates the energy.
pub fn discrete_energy(
    network: &Network,
    sources: &SourceVector,
    params: &EnergyParams,
    opts: &SolveOptions,
) -> Result<EnergyBreakdown> {
    let state = solve_pressures(network, sources, opts)?;
    Ok(energy_from_fluxes(network, &state.fluxes, params))
}

/// Closed-form gradient from a solved state. `Q/C` is evaluated as `ΔP/L`,
/// so the value is finite on zero-conductivity edges when `γ ≥ 1`.
pub fn gradient_from_state(
    network: &Network,
    state: &PressureState,
    params: &EnergyParams,
) -> Result<Vec<f64>> {
    let nu = params.gradient_coefficient();
    network
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| {
            if e.conductivity == 0.0 && params.gamma < 1.0 {
                return Err(Error::GradientSingularity { edge: k });
            }
            let g = (state.pressures[e.j] - state.pressures[e.i]) / e.length;
            Ok(-(g * g - nu * e.conductivity.powf(params.gamma - 1.0)) * e.length)
        })
        .collect()
}

pub fn energy_gradient(
    network: &Network,
    sources: &SourceVector,
    params: &EnergyParams,
    opts: &SolveOptions,
) -> Result<Vec<f64>> {
    let state = solve_pressures(network, sources, opts)?;
    gradient_from_state(network, &state, params)
}

/// Right-hand side of the gradient flow, `−C^α ∂E/∂C`, written as
/// `(Q²/C − ν' C^γ) C^{α−1} L`. Zero on edges with `C = 0`.
pub fn flow_rhs(network: &Network, state: &PressureState, params: &EnergyParams) -> Vec<f64> {
    let nu = params.gradient_coefficient();
    network
        .edges()
        .iter()
        .map(|e| {
            let c = e.conductivity;
            if c <= 0.0 {
                return 0.0;
            }
            let g = (state.pressures[e.j] - state.pressures[e.i]) / e.length;
            c.powf(params.alpha) * (g * g - nu * c.powf(params.gamma - 1.0)) * e.length
        })
        .collect()
}

/// `−Σ (Q²/C − ν' C^γ)² C^{α−2} L²` over edges with `C > 0`.
pub fn dissipation_from_state(
    network: &Network,
    state: &PressureState,
    params: &EnergyParams,
) -> f64 {
    let nu = params.gradient_coefficient();
    let mut acc = 0.0;
    for (e, &q) in network.edges().iter().zip(&state.fluxes) {
        let c = e.conductivity;
        if c <= 0.0 {
            continue;
        }
        let f = q * q / c - nu * c.powf(params.gamma);
        acc += f * f * c.powf(params.alpha - 2.0) * e.length * e.length;
    }
    -acc
}

pub fn dissipation_rate(
    network: &Network,
    sources: &SourceVector,
    params: &EnergyParams,
    opts: &SolveOptions,
) -> Result<f64> {
    let state = solve_pressures(network, sources, opts)?;
    Ok(dissipation_from_state(network, &state, params))
}

/// `Σ (Q²/C + μ C^γ) W^d` with a uniform weight.
pub fn weighted_energy(
    network: &Network,
    sources: &SourceVector,
    params: &EnergyParams,
    weight: f64,
    dimension: u32,
    opts: &SolveOptions,
) -> Result<f64> {
    let w = vec![weight.powi(dimension as i32); network.n_edges()];
    weighted_energy_per_edge(network, sources, params, &w, opts)
}

/// `Σ (Q²/C + μ C^γ) w_e` with an arbitrary positive factor per edge.
pub fn weighted_energy_per_edge(
    network: &Network,
    sources: &SourceVector,
    params: &EnergyParams,
    weights: &[f64],
    opts: &SolveOptions,
) -> Result<f64> {
    if weights.len() != network.n_edges() {
        return Err(Error::DimensionMismatch {
            expected: network.n_edges(),
            got: weights.len(),
        });
    }
    let state = solve_pressures(network, sources, opts)?;
    let mu = params.metabolic_coefficient();
    Ok(network
        .edges()
        .iter()
        .zip(&state.fluxes)
        .zip(weights)
        .filter(|((e, _), _)| e.conductivity > 0.0)
        .map(|((e, q), w)| (q * q / e.conductivity + mu * e.conductivity.powf(params.gamma)) * w)
        .sum())
}
