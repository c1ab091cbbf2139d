//! Conductivity-weighted graph Laplacian and the pressure/flux solve.
//!
//! The node balance reads `Σ_j C_ij (P_i − P_j) / L_ij^m = S_i`; fluxes are
//! always `Q_ij = C_ij (P_j − P_i) / L_ij` regardless of `m`. The system is
//! singular up to an additive constant per connected component, which is fixed
//! either by grounding one vertex or by a zero-mean condition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{active_components, Network, SourceVector};
use crate::linalg::{self, CsrMatrix};

/// Power of the edge length in the Laplacian weights `C / L^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(try_from = "u8", into = "u8")]
pub enum LengthExponent {
    /// `C / L`, the flux-balance form.
    #[default]
    One,
    /// `C / L²`, the finite-difference form.
    Two,
}

impl LengthExponent {
    pub fn weight(self, conductivity: f64, length: f64) -> f64 {
        match self {
            LengthExponent::One => conductivity / length,
            LengthExponent::Two => conductivity / (length * length),
        }
    }
}

impl TryFrom<u8> for LengthExponent {
    type Error = String;
    fn try_from(m: u8) -> std::result::Result<Self, String> {
        match m {
            1 => Ok(LengthExponent::One),
            2 => Ok(LengthExponent::Two),
            _ => Err(format!("length exponent must be 1 or 2, got {m}")),
        }
    }
}

impl From<LengthExponent> for u8 {
    fn from(m: LengthExponent) -> u8 {
        match m {
            LengthExponent::One => 1,
            LengthExponent::Two => 2,
        }
    }
}

/// How the additive pressure constant is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gauge {
    /// Pressure zero at the given vertex, or at the highest-numbered vertex of
    /// the source-carrying component when `None`.
    Ground(Option<usize>),
    /// Zero mean over the source-carrying component.
    MeanZero,
}

impl Default for Gauge {
    fn default() -> Self {
        Gauge::Ground(None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverBackend {
    /// Dense Cholesky for small systems, conjugate gradients otherwise.
    #[default]
    Auto,
    Dense,
    ConjugateGradient,
    /// Minimum-norm least squares on the full singular system.
    LeastSquares,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub exponent: LengthExponent,
    /// Relative node-balance tolerance: residual ≤ tolerance · ‖S‖₂.
    pub tolerance: f64,
    /// Edges with `C ≤ threshold` are left out of the system.
    pub threshold: f64,
    pub backend: SolverBackend,
    pub gauge: Gauge,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            exponent: LengthExponent::One,
            tolerance: 1e-9,
            threshold: 0.0,
            backend: SolverBackend::Auto,
            gauge: Gauge::default(),
        }
    }
}

impl SolveOptions {
    pub fn with_exponent(exponent: LengthExponent) -> Self {
        SolveOptions {
            exponent,
            ..Default::default()
        }
    }
}

/// The full (ungrounded) weighted Laplacian of the active subgraph.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianSystem {
    pub matrix: CsrMatrix,
    pub exponent: LengthExponent,
    pub threshold: f64,
}

impl LaplacianSystem {
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.matrix.row(i).map(|(_, v)| v).sum()
    }
}

/// Assembles `b_ij = −C_ij / L_ij^m` off the diagonal and
/// `b_ii = Σ_{j∈N(i)} C_ij / L_ij^m`, using edges with `C > 0`.
pub fn assemble(network: &Network, exponent: LengthExponent) -> LaplacianSystem {
    assemble_active(network, exponent, 0.0)
}

/// As [`assemble`], keeping only edges with `C > threshold`.
pub fn assemble_active(
    network: &Network,
    exponent: LengthExponent,
    threshold: f64,
) -> LaplacianSystem {
    let mut trip = Vec::with_capacity(4 * network.n_edges());
    for e in network.edges() {
        if e.conductivity <= threshold {
            continue;
        }
        let w = exponent.weight(e.conductivity, e.length);
        trip.push((e.i, e.i, w));
        trip.push((e.j, e.j, w));
        trip.push((e.i, e.j, -w));
        trip.push((e.j, e.i, -w));
    }
    LaplacianSystem {
        matrix: CsrMatrix::from_triplets(network.n_vertices(), &trip),
        exponent,
        threshold,
    }
}

/// Solved pressures and per-edge fluxes.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureState {
    pub pressures: Vec<f64>,
    /// Flux along each edge in its canonical orientation `i → j`.
    pub fluxes: Vec<f64>,
    /// `‖B P − S‖₂` over all vertices.
    pub residual: f64,
}

/// `Q_ij = C_ij (P_j − P_i) / L_ij` for every edge.
pub fn compute_fluxes(network: &Network, pressures: &[f64]) -> Vec<f64> {
    network
        .edges()
        .iter()
        .map(|e| e.conductivity * (pressures[e.j] - pressures[e.i]) / e.length)
        .collect()
}

/// Solves the node balance for the pressures and derives the fluxes.
///
/// Vertices outside the component that carries the sources get pressure 0.
/// Fluxes on edges left out of the system (`C ≤ threshold`) are reported as 0.
pub fn solve_pressures(
    network: &Network,
    sources: &SourceVector,
    opts: &SolveOptions,
) -> Result<PressureState> {
    let n = network.n_vertices();
    if sources.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: sources.len(),
        });
    }
    let s = sources.values();
    let s_scale = s.iter().map(|v| v.abs()).sum::<f64>().max(1e-300);
    let sum = sources.sum();
    if sum.abs() > 1e-10 * s_scale {
        return Err(Error::IncompatibleSources { sum });
    }
    let system = assemble_active(network, opts.exponent, opts.threshold);
    let mut pressures = vec![0.0; n];

    let support = sources.support();
    if !support.is_empty() {
        let comps = active_components(network, opts.threshold);
        let mut comp_of = vec![0usize; n];
        for (k, c) in comps.iter().enumerate() {
            for &v in c {
                comp_of[v] = k;
            }
        }
        let mut touched: Vec<usize> = support.iter().map(|&v| comp_of[v]).collect();
        touched.sort_unstable();
        touched.dedup();
        if touched.len() > 1 {
            return Err(Error::DisconnectedSupport {
                components: touched.iter().map(|&k| comps[k].clone()).collect(),
            });
        }
        let main = &comps[touched[0]];
        let in_main = {
            let mut m = vec![false; n];
            for &v in main {
                m[v] = true;
            }
            m
        };
        let local = solve_component(&system, s, main, &in_main, opts)?;
        for (&v, p) in main.iter().zip(local) {
            pressures[v] = p;
        }
    }

    let residual = balance_residual(&system, &pressures, s);
    let target = opts.tolerance * sources.norm();
    if !residual.is_finite() || (!support.is_empty() && residual > target) {
        return Err(Error::SolverNotConverged { residual, target });
    }

    let mut fluxes = compute_fluxes(network, &pressures);
    for (q, e) in fluxes.iter_mut().zip(network.edges()) {
        if e.conductivity <= opts.threshold {
            *q = 0.0;
        }
    }
    Ok(PressureState {
        pressures,
        fluxes,
        residual,
    })
}

fn balance_residual(system: &LaplacianSystem, p: &[f64], s: &[f64]) -> f64 {
    let mut bp = vec![0.0; p.len()];
    system.matrix.mul_vec(p, &mut bp);
    bp.iter()
        .zip(s)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

// Solves on one connected component; returns pressures in the order of `comp`.
fn solve_component(
    system: &LaplacianSystem,
    s: &[f64],
    comp: &[usize],
    in_comp: &[bool],
    opts: &SolveOptions,
) -> Result<Vec<f64>> {
    let m = comp.len();
    if m == 1 {
        return Ok(vec![0.0]);
    }
    let rhs: Vec<f64> = comp.iter().map(|&v| s[v]).collect();
    let ground = match opts.gauge {
        Gauge::Ground(Some(g)) if in_comp.get(g).copied().unwrap_or(false) => {
            comp.iter().position(|&v| v == g).unwrap()
        }
        _ => m - 1,
    };

    let mut local = if opts.backend == SolverBackend::LeastSquares {
        let full = system.matrix.restrict(in_comp);
        let x =
            linalg::least_squares_solve(&full, &rhs).ok_or(Error::NonFinite("least squares"))?;
        let shift = x[ground];
        x.into_iter().map(|v| v - shift).collect::<Vec<_>>()
    } else {
        let mut keep = in_comp.to_vec();
        keep[comp[ground]] = false;
        let reduced = system.matrix.restrict(&keep);
        let b: Vec<f64> = (0..m).filter(|&k| k != ground).map(|k| rhs[k]).collect();
        let use_dense = match opts.backend {
            SolverBackend::Dense => true,
            SolverBackend::ConjugateGradient => false,
            _ => m <= 600,
        };
        let x = if use_dense {
            linalg::dense_spd_solve(&reduced, &b).ok_or(Error::SolverNotConverged {
                residual: f64::INFINITY,
                target: 0.0,
            })?
        } else {
            let mut x = vec![0.0; m - 1];
            let tol = 0.5 * opts.tolerance * linalg::norm2(&b);
            linalg::pcg(&reduced, &b, &mut x, tol, 20 * m + 1000);
            x
        };
        let mut full = Vec::with_capacity(m);
        let mut it = x.into_iter();
        for k in 0..m {
            full.push(if k == ground { 0.0 } else { it.next().unwrap() });
        }
        full
    };
    if opts.gauge == Gauge::MeanZero {
        let mean = local.iter().sum::<f64>() / m as f64;
        for v in &mut local {
            *v -= mean;
        }
    }
    if local.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("pressures"));
    }
    Ok(local)
}
