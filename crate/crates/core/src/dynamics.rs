//! Time stepping of the conductivity gradient flow.
//!
//! One iteration solves the pressures, takes an explicit or proximal step
//! with Armijo backtracking on the true (re-solved) energy, and prunes edges
//! whose conductivity fell to the threshold. Both step kinds use the metric
//! `‖ΔC‖² = Σ ΔC²/C̄^α` of the flow `Ċ = −C^α ∂E/∂C`; with `α = 0` this is the
//! Euclidean norm.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::energy::{energy_from_fluxes, flow_rhs, EnergyBreakdown, EnergyParams};
use crate::error::{Error, Result};
use crate::graph::{active_components, cut_flux, cycle_count, CutPartition, Network, SourceVector};
use crate::kirchhoff::{
    solve_pressures, LengthExponent, PressureState, SolveOptions, SolverBackend,
};
use crate::prox::scalar_prox;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepMode {
    Explicit,
    #[default]
    Proximal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArmijoParams {
    pub shrink: f64,
    pub sufficient_decrease: f64,
    pub min_tau: f64,
}

impl Default for ArmijoParams {
    fn default() -> Self {
        ArmijoParams {
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            min_tau: 1e-14,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsConfig {
    pub tau: f64,
    pub tol: f64,
    pub prune_threshold: f64,
    pub max_iters: usize,
    pub mode: StepMode,
    pub armijo: ArmijoParams,
    pub energy: EnergyParams,
    pub exponent: LengthExponent,
    /// Extra stopping condition `max |ΔC|/τ ≤ step_tol`.
    pub step_tol: Option<f64>,
    /// Extra stopping condition `max |ΔC|/(τ C̄) ≤ rate_tol` over active edges.
    pub rate_tol: Option<f64>,
    /// Compare energies with the pressures frozen at the start of the step.
    pub frozen_energy_criterion: bool,
    pub solve_tolerance: f64,
    pub backend: SolverBackend,
}

impl DynamicsConfig {
    pub fn new(energy: EnergyParams) -> Self {
        DynamicsConfig {
            tau: 0.025,
            tol: 1e-6,
            prune_threshold: 1e-12,
            max_iters: 100_000,
            mode: StepMode::Proximal,
            armijo: ArmijoParams::default(),
            energy,
            exponent: LengthExponent::One,
            step_tol: None,
            rate_tol: None,
            frozen_energy_criterion: false,
            solve_tolerance: 1e-9,
            backend: SolverBackend::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.energy.validate()?;
        let bad = |what: &str, v: f64| Err(Error::InvalidParameter(format!("{what} = {v}")));
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad("tau", self.tau);
        }
        if !(self.tol > 0.0) {
            return bad("tol", self.tol);
        }
        if !(self.prune_threshold >= 0.0) {
            return bad("prune_threshold", self.prune_threshold);
        }
        let a = self.armijo;
        if !(a.shrink > 0.0 && a.shrink < 1.0) {
            return bad("armijo shrink", a.shrink);
        }
        if !(a.sufficient_decrease > 0.0 && a.sufficient_decrease < 1.0) {
            return bad("armijo sufficient decrease", a.sufficient_decrease);
        }
        Ok(())
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            exponent: self.exponent,
            tolerance: self.solve_tolerance,
            threshold: self.prune_threshold,
            backend: self.backend,
            ..Default::default()
        }
    }
}

fn check_pressures(p: &[f64]) -> Result<()> {
    if p.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("pressures"))
    }
}

/// `C ← max(0, C + τ (Q²/C − ν' C^γ) C^{α−1} L)` on edges above the prune
/// threshold; other edges are left as they are.
pub fn explicit_step(
    network: &Network,
    state: &PressureState,
    config: &DynamicsConfig,
    tau: f64,
) -> Result<Network> {
    check_pressures(&state.pressures)?;
    let rhs = flow_rhs(network, state, &config.energy);
    let c: Vec<f64> = network
        .edges()
        .iter()
        .zip(&rhs)
        .map(|(e, r)| {
            if e.conductivity > config.prune_threshold {
                (e.conductivity + tau * r).max(0.0)
            } else {
                e.conductivity
            }
        })
        .collect();
    network.with_conductivities(&c)
}

/// Proximal update with the pressures frozen.
///
/// Per active edge this minimizes
/// `(c − c̄)²/(2τ c̄^α) − c ΔP²/L + μ L c^γ` over `c ≥ 0`.
pub fn proximal_step(
    network_prev: &Network,
    pressures: &[f64],
    config: &DynamicsConfig,
    tau: f64,
) -> Result<Network> {
    check_pressures(pressures)?;
    let p = &config.energy;
    let mu = p.metabolic_coefficient();
    let c: Vec<f64> = network_prev
        .edges()
        .iter()
        .map(|e| {
            let cbar = e.conductivity;
            if cbar <= config.prune_threshold {
                return cbar;
            }
            let dp = pressures[e.j] - pressures[e.i];
            scalar_prox(
                cbar,
                tau * cbar.powf(p.alpha),
                dp * dp / e.length,
                mu * e.length,
                p.gamma,
            )
        })
        .collect();
    network_prev.with_conductivities(&c)
}

/// `Σ (C − C̄)² / C̄^α` over edges with `C̄ > 0`.
pub fn metric_norm_sq(prev: &Network, next: &Network, alpha: f64) -> f64 {
    prev.edges()
        .iter()
        .zip(next.edges())
        .filter(|(a, _)| a.conductivity > 0.0)
        .map(|(a, b)| {
            let d = b.conductivity - a.conductivity;
            d * d / a.conductivity.powf(alpha)
        })
        .sum()
}

/// Result of a backtracking step.
#[derive(Debug, Clone)]
pub struct ArmijoStep {
    pub tau: f64,
    pub network: Network,
    pub state: PressureState,
    pub energy: EnergyBreakdown,
    pub metric_sq: f64,
    pub backtracks: usize,
}

fn take_step(
    network: &Network,
    state: &PressureState,
    config: &DynamicsConfig,
    tau: f64,
) -> Result<Network> {
    match config.mode {
        StepMode::Explicit => explicit_step(network, state, config, tau),
        StepMode::Proximal => proximal_step(network, &state.pressures, config, tau),
    }
}

/// Backtracks from `tau_init` until
/// `E[C] ≤ E[C̄] − σ ‖C − C̄‖²/τ` holds for the re-solved energy.
pub fn armijo_select_tau(
    network: &Network,
    sources: &SourceVector,
    config: &DynamicsConfig,
    tau_init: f64,
) -> Result<ArmijoStep> {
    let opts = config.solve_options();
    let state = solve_pressures(network, sources, &opts)?;
    let energy = energy_from_fluxes(network, &state.fluxes, &config.energy);
    armijo_from(network, &state, energy, sources, config, tau_init)
}

fn armijo_from(
    network: &Network,
    state: &PressureState,
    energy: EnergyBreakdown,
    sources: &SourceVector,
    config: &DynamicsConfig,
    tau_init: f64,
) -> Result<ArmijoStep> {
    let opts = config.solve_options();
    let a = config.armijo;
    // roundoff allowance in comparing two energy evaluations
    let slack = (8.0 * f64::EPSILON * energy.total.abs()).min(1e-10);
    let mut tau = tau_init;
    let mut backtracks = 0;
    while tau >= a.min_tau {
        let candidate = take_step(network, state, config, tau)?;
        let metric_sq = metric_norm_sq(network, &candidate, config.energy.alpha);
        match solve_pressures(&candidate, sources, &opts) {
            Ok(new_state) => {
                let new_energy = energy_from_fluxes(&candidate, &new_state.fluxes, &config.energy);
                if new_energy.total
                    <= energy.total - a.sufficient_decrease * metric_sq / tau + slack
                {
                    return Ok(ArmijoStep {
                        tau,
                        network: candidate,
                        state: new_state,
                        energy: new_energy,
                        metric_sq,
                        backtracks,
                    });
                }
            }
            Err(Error::DisconnectedSupport { .. }) => {}
            Err(e) => return Err(e),
        }
        tau *= a.shrink;
        backtracks += 1;
    }
    Err(Error::StepFailure { min_tau: a.min_tau })
}

/// Sets conductivities `0 < C ≤ threshold` to zero and checks that the
/// vertices carrying sources remain connected. Edge indices are kept.
pub fn prune_edges(
    network: &Network,
    sources: &SourceVector,
    threshold: f64,
) -> Result<(Network, Vec<usize>)> {
    let mut c = network.conductivities();
    let mut removed = Vec::new();
    for (k, v) in c.iter_mut().enumerate() {
        if *v > 0.0 && *v <= threshold {
            *v = 0.0;
            removed.push(k);
        }
    }
    let pruned = network.with_conductivities(&c)?;
    let support = sources.support();
    if !support.is_empty() {
        let comps = active_components(&pruned, threshold);
        let touched: Vec<Vec<usize>> = comps
            .into_iter()
            .filter(|comp| comp.iter().any(|v| support.contains(v)))
            .collect();
        if touched.len() > 1 {
            return Err(Error::ConnectivityViolation {
                components: touched,
            });
        }
    }
    Ok((pruned, removed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub iter: usize,
    pub conductivities: Vec<f64>,
    pub energy: EnergyBreakdown,
    pub tau_accepted: f64,
    pub n_active_edges: usize,
    pub n_cycles: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneEvent {
    pub iteration: usize,
    pub edge: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "reason")]
pub enum Termination {
    EnergyConverged,
    /// The energy criterion holds but no step gives a decrease above
    /// roundoff, so the secondary criteria can not be reached.
    Stalled,
    MaxIters,
    Error {
        iteration: usize,
        message: String,
    },
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    pub prune_events: Vec<PruneEvent>,
    pub termination: Termination,
    pub final_network: Network,
    pub(crate) failure: Option<Error>,
}

impl Trajectory {
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.iter)
    }

    pub fn final_energy(&self) -> EnergyBreakdown {
        self.records.last().map(|r| r.energy).unwrap_or_default()
    }

    /// True when total energy never increases by more than `slack`.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.records
            .windows(2)
            .all(|w| w[1].energy.total <= w[0].energy.total + slack)
    }

    /// `Σ_{cut} C` at every record.
    pub fn cut_sums(&self, network: &Network, partition: &CutPartition) -> Vec<f64> {
        let cut = partition.cut_edges(network);
        self.records
            .iter()
            .map(|r| cut.iter().map(|&k| r.conductivities[k]).sum())
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "iter,E_total,E_pumping,E_metabolic,tau_accepted,n_active_edges,n_cycles\n",
        );
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.iter,
                r.energy.total,
                r.energy.pumping,
                r.energy.metabolic,
                r.tau_accepted,
                r.n_active_edges,
                r.n_cycles
            );
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

fn record(
    iter: usize,
    net: &Network,
    energy: EnergyBreakdown,
    tau: f64,
    threshold: f64,
) -> TrajectoryRecord {
    TrajectoryRecord {
        iter,
        conductivities: net.conductivities(),
        energy,
        tau_accepted: tau,
        n_active_edges: net.active_edges(threshold).len(),
        n_cycles: cycle_count(net, threshold),
    }
}

/// Iterates solve → step → prune until the energy criterion (and any
/// configured secondary criterion) is met or `max_iters` is reached.
pub fn run_to_steady_state(
    network: &Network,
    sources: &SourceVector,
    config: &DynamicsConfig,
) -> Result<Trajectory> {
    let traj = run_recording(network, sources, config);
    match (&traj.termination, &traj.failure) {
        (Termination::Error { iteration, .. }, Some(e)) => Err(Error::AtIteration {
            iteration: *iteration,
            source: Box::new(e.clone()),
        }),
        _ => Ok(traj),
    }
}

/// As [`run_to_steady_state`], but a failure ends the trajectory with
/// [`Termination::Error`] instead of discarding it.
pub fn run_recording(
    network: &Network,
    sources: &SourceVector,
    config: &DynamicsConfig,
) -> Trajectory {
    let mut traj = Trajectory {
        records: Vec::new(),
        prune_events: Vec::new(),
        termination: Termination::MaxIters,
        final_network: network.clone(),
        failure: None,
    };
    if let Err(e) = run_inner(network, sources, config, &mut traj) {
        let iteration = traj.records.last().map_or(0, |r| r.iter + 1);
        traj.termination = Termination::Error {
            iteration,
            message: e.to_string(),
        };
        traj.failure = Some(e);
    }
    traj
}

fn run_inner(
    network: &Network,
    sources: &SourceVector,
    config: &DynamicsConfig,
    traj: &mut Trajectory,
) -> Result<()> {
    config.validate()?;
    let threshold = config.prune_threshold;
    let opts = config.solve_options();
    let (mut net, removed) = prune_edges(network, sources, threshold)?;
    traj.prune_events.extend(
        removed
            .into_iter()
            .map(|edge| PruneEvent { iteration: 0, edge }),
    );
    let mut state = solve_pressures(&net, sources, &opts)?;
    let mut energy = energy_from_fluxes(&net, &state.fluxes, &config.energy);
    traj.records.push(record(0, &net, energy, 0.0, threshold));
    traj.final_network = net.clone();

    for iter in 1..=config.max_iters {
        let step = match armijo_from(&net, &state, energy, sources, config, config.tau) {
            Ok(step) => step,
            Err(Error::StepFailure { min_tau }) => {
                if below_resolution(&net, &state, energy, sources, config)? {
                    traj.termination = Termination::Stalled;
                    return Ok(());
                }
                return Err(Error::StepFailure { min_tau });
            }
            Err(e) => return Err(e),
        };
        let tau = step.tau;
        let regularized = if config.frozen_energy_criterion {
            frozen_energy(&step.network, &state.pressures, &config.energy)
                + step.metric_sq / (2.0 * tau)
        } else {
            step.energy.total + step.metric_sq / (2.0 * tau)
        };
        let energy_change = (regularized - energy.total).abs();
        let (max_step, max_rate) = step_measures(&net, &step.network, tau);

        let (pruned, removed) = prune_edges(&step.network, sources, threshold)?;
        if removed.is_empty() {
            state = step.state;
            energy = step.energy;
        } else {
            traj.prune_events
                .extend(removed.iter().map(|&edge| PruneEvent {
                    iteration: iter,
                    edge,
                }));
            state = solve_pressures(&pruned, sources, &opts)?;
            energy = energy_from_fluxes(&pruned, &state.fluxes, &config.energy);
        }
        net = pruned;
        traj.records
            .push(record(iter, &net, energy, tau, threshold));
        traj.final_network = net.clone();

        let converged = energy_change <= config.tol
            && config.step_tol.map_or(true, |t| max_step <= t)
            && config.rate_tol.map_or(true, |t| max_rate <= t);
        if converged {
            traj.termination = Termination::EnergyConverged;
            return Ok(());
        }
    }
    traj.termination = Termination::MaxIters;
    Ok(())
}

// True when the full step already meets the energy criterion, so a failed
// line search only reflects roundoff in the energy evaluation.
fn below_resolution(
    net: &Network,
    state: &PressureState,
    energy: EnergyBreakdown,
    sources: &SourceVector,
    config: &DynamicsConfig,
) -> Result<bool> {
    let tau = config.tau;
    let candidate = take_step(net, state, config, tau)?;
    let new_state = match solve_pressures(&candidate, sources, &config.solve_options()) {
        Ok(s) => s,
        Err(Error::DisconnectedSupport { .. }) => return Ok(false),
        Err(e) => return Err(e),
    };
    let e_new = energy_from_fluxes(&candidate, &new_state.fluxes, &config.energy).total;
    let metric_sq = metric_norm_sq(net, &candidate, config.energy.alpha);
    Ok((e_new + metric_sq / (2.0 * tau) - energy.total).abs() <= config.tol)
}

// Energy of `next` evaluated with the fluxes `C ΔP/L` of frozen pressures.
fn frozen_energy(next: &Network, pressures: &[f64], params: &EnergyParams) -> f64 {
    let mu = params.metabolic_coefficient();
    next.edges()
        .iter()
        .filter(|e| e.conductivity > 0.0)
        .map(|e| {
            let dp = pressures[e.j] - pressures[e.i];
            e.conductivity * dp * dp / e.length + mu * e.conductivity.powf(params.gamma) * e.length
        })
        .sum()
}

fn step_measures(prev: &Network, next: &Network, tau: f64) -> (f64, f64) {
    let mut max_step = 0.0f64;
    let mut max_rate = 0.0f64;
    for (a, b) in prev.edges().iter().zip(next.edges()) {
        if a.conductivity > 0.0 {
            let d = (b.conductivity - a.conductivity).abs() / tau;
            max_step = max_step.max(d);
            max_rate = max_rate.max(d / a.conductivity);
        }
    }
    (max_step, max_rate)
}

/// Guaranteed lower bound on the total conductivity crossing a cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutBound {
    pub kappa1: f64,
    pub kappa2: f64,
    pub u0: f64,
    pub bound: f64,
}

/// `κ₁ = ΔS²/|E_cut|² · min L`, `κ₂ = ν' Σ L`, `u₀ = Σ C`, all over the cut
/// edges, and `bound = min{u₀, (κ₁/κ₂)^{1/(γ+1)}}`.
///
/// Only valid for `0 < γ + α − 1 < 1` and pressures solved with length
/// exponent 1.
pub fn cut_bound(
    network: &Network,
    partition: &CutPartition,
    sources: &SourceVector,
    params: &EnergyParams,
) -> Result<CutBound> {
    let r = params.gamma + params.alpha - 1.0;
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "cut bound requires 0 < gamma + alpha - 1 < 1, got {r}"
        )));
    }
    let ds = cut_flux(partition, sources)?;
    let scale = sources
        .values()
        .iter()
        .map(|v| v.abs())
        .sum::<f64>()
        .max(1.0);
    if ds.abs() <= SourceVector::BALANCE_TOL * scale {
        return Err(Error::BoundNotApplicable);
    }
    let cut = partition.cut_edges(network);
    if cut.is_empty() {
        return Err(Error::InvalidPartition("no edge crosses the cut".into()));
    }
    let n = cut.len() as f64;
    let min_l = cut
        .iter()
        .map(|&k| network.edge(k).length)
        .fold(f64::INFINITY, f64::min);
    let sum_l: f64 = cut.iter().map(|&k| network.edge(k).length).sum();
    let u0: f64 = cut.iter().map(|&k| network.edge(k).conductivity).sum();
    let kappa1 = ds * ds / (n * n) * min_l;
    let kappa2 = params.gradient_coefficient() * sum_l;
    let bound = u0.min((kappa1 / kappa2).powf(1.0 / (params.gamma + 1.0)));
    Ok(CutBound {
        kappa1,
        kappa2,
        u0,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::MetabolicForm;

    fn edge_net(c: f64) -> Network {
        Network::from_tuples(vec![[0.0, 0.0], [1.0, 0.0]], &[(0, 1, 1.0, c)]).unwrap()
    }

    fn src(s: f64) -> SourceVector {
        SourceVector::new(vec![s, -s]).unwrap()
    }

    fn config(gamma: f64, mode: StepMode) -> DynamicsConfig {
        let mut c = DynamicsConfig::new(
            EnergyParams::with_default_alpha(gamma, 1.0, MetabolicForm::OverGamma).unwrap(),
        );
        c.mode = mode;
        c
    }

    #[test]
    fn steady_edge_does_not_move() {
        for mode in [StepMode::Explicit, StepMode::Proximal] {
            let cfg = config(0.5, mode);
            let net = edge_net(1.0);
            let st = solve_pressures(&net, &src(1.0), &cfg.solve_options()).unwrap();
            let next = take_step(&net, &st, &cfg, 0.025).unwrap();
            assert!((next.edge(0).conductivity - 1.0).abs() < 1e-12);
            let step = armijo_select_tau(&net, &src(1.0), &cfg, 0.025).unwrap();
            assert_eq!(step.backtracks, 0);
            assert!(step.metric_sq < 1e-20);
        }
    }

    #[test]
    fn explicit_iteration_reaches_fixed_point() {
        let cfg = config(0.5, StepMode::Explicit);
        let mut net = edge_net(0.5);
        let s = src(1.0);
        for _ in 0..5000 {
            let st = solve_pressures(&net, &s, &cfg.solve_options()).unwrap();
            net = explicit_step(&net, &st, &cfg, 0.01).unwrap();
        }
        assert!((net.edge(0).conductivity - 1.0).abs() < 1e-6);
    }

    #[test]
    fn explicit_clamps_at_zero() {
        let cfg = config(0.5, StepMode::Explicit);
        let net = edge_net(1.0);
        let st = solve_pressures(&net, &SourceVector::zeros(2), &cfg.solve_options()).unwrap();
        let next = explicit_step(&net, &st, &cfg, 10.0).unwrap();
        assert_eq!(next.edge(0).conductivity, 0.0);
    }

    #[test]
    fn armijo_backtracks_from_huge_step() {
        let cfg = config(0.5, StepMode::Explicit);
        let net = edge_net(20.0);
        let s = src(1.0);
        let step = armijo_select_tau(&net, &s, &cfg, 1e3).unwrap();
        assert!(step.backtracks > 0);
        assert!(step.tau < 1e3);
        let e0 =
            crate::energy::discrete_energy(&net, &s, &cfg.energy, &cfg.solve_options()).unwrap();
        assert!(step.energy.total < e0.total);
    }

    #[test]
    fn prune_examples() {
        let s = SourceVector::new(vec![1.0, 0.0, -1.0]).unwrap();
        let g = Network::from_tuples(
            vec![[0.0, 0.0]; 3],
            &[(0, 1, 1.0, 1.0), (1, 2, 1.0, 1.0), (0, 2, 1.0, 2.0)],
        )
        .unwrap();
        let (p, removed) = prune_edges(&g, &s, 1e-12).unwrap();
        assert!(removed.is_empty());
        assert_eq!(p, g);

        let g = g.with_conductivities(&[1.0, 1e-13, 2.0]).unwrap();
        let (p, removed) = prune_edges(&g, &s, 1e-12).unwrap();
        assert_eq!(removed, vec![1]);
        assert_eq!(p.edge(1).conductivity, 0.0);
        assert_eq!(p.n_edges(), 3);

        let star = Network::from_tuples(
            vec![[0.0, 0.0]; 4],
            &[(0, 1, 1.0, 1e-13), (0, 2, 1.0, 1.0), (0, 3, 1.0, 1.0)],
        )
        .unwrap();
        let s = SourceVector::new(vec![1.0, -1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            prune_edges(&star, &s, 1e-12),
            Err(Error::ConnectivityViolation { .. })
        ));
    }

    #[test]
    fn single_edge_run_converges() {
        for mode in [StepMode::Explicit, StepMode::Proximal] {
            let mut cfg = config(0.5, mode);
            cfg.step_tol = Some(1e-6);
            let traj = run_to_steady_state(&edge_net(0.5), &src(1.0), &cfg).unwrap();
            assert_eq!(traj.termination, Termination::EnergyConverged);
            assert!((traj.final_network.edge(0).conductivity - 1.0).abs() < 1e-4);
            assert!(traj.is_monotone(1e-10));
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let cfg = config(0.5, StepMode::Proximal);
        let traj = run_to_steady_state(&edge_net(0.5), &src(1.0), &cfg).unwrap();
        let csv = traj.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "iter,E_total,E_pumping,E_metabolic,tau_accepted,n_active_edges,n_cycles"
        );
        assert_eq!(lines.count(), traj.records.len());
    }

    #[test]
    fn cut_bound_examples() {
        let p = EnergyParams::new(0.5, 1.0, 1.0, MetabolicForm::OverGamma).unwrap();
        let net = edge_net(3.0);
        let part = CutPartition::from_first(2, &[0]).unwrap();
        let b = cut_bound(&net, &part, &src(1.0), &p).unwrap();
        assert_eq!((b.kappa1, b.kappa2, b.u0), (1.0, 1.0, 3.0));
        assert_eq!(b.bound, 1.0);

        let two = Network::from_tuples(
            vec![[0.0, 0.0]; 3],
            &[(0, 1, 1.0, 0.1), (0, 2, 1.0, 0.2), (1, 2, 1.0, 1.0)],
        )
        .unwrap();
        let s = SourceVector::new(vec![1.0, -0.5, -0.5]).unwrap();
        let part = CutPartition::from_first(3, &[0]).unwrap();
        let b = cut_bound(&two, &part, &s, &p).unwrap();
        assert_eq!(b.kappa1, 0.25);
        assert_eq!(b.kappa2, 2.0);
        assert!((b.bound - 0.25).abs() < 1e-12);

        let s = SourceVector::new(vec![0.0, 1.0, -1.0]).unwrap();
        assert_eq!(
            cut_bound(&two, &part, &s, &p),
            Err(Error::BoundNotApplicable)
        );
    }
}
