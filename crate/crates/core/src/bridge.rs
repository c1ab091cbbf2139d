//! Numerical checks that connect grid-sampled networks with the continuum
//! model: sampling, consistency of the rescaled Kirchhoff law, convergence of
//! the weighted energy and the gradient-flow structure under uniform weights.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{weighted_energy_per_edge, EnergyParams};
use crate::error::{Error, Result};
use crate::graph::{Edge, Network, SourceVector};
use crate::kirchhoff::{solve_pressures, LengthExponent, SolveOptions};
use crate::pde::{sample_sources, solve_poisson_grid, weighted_rhs, DiagonalTensorField, GridSpec};

/// Closed-form conductivity component `c^k(x)`.
pub type ComponentFn<'a> = &'a (dyn Fn(usize, [f64; 2]) -> f64 + Sync);
/// Closed-form scalar field on the domain.
pub type ScalarFn<'a> = &'a (dyn Fn([f64; 2]) -> f64 + Sync);

/// A network read off a grid: vertices are the nodes, edges are the grid
/// edges with `C = c^k` at the midpoint and `L = h_k`, and node sources are
/// the point values `S(X_i)`.
#[derive(Debug, Clone)]
pub struct SampledNetwork {
    pub network: Network,
    pub node_sources: Vec<f64>,
    pub grid: GridSpec,
    axes: Vec<usize>,
}

impl SampledNetwork {
    /// Grid axis of each network edge.
    pub fn edge_axis(&self, edge: usize) -> usize {
        self.axes[edge]
    }

    /// Network sources `w_i S(X_i)`, projected to exact balance.
    pub fn kirchhoff_sources(&self) -> Result<SourceVector> {
        let b = weighted_rhs(&self.node_sources, &self.grid)?;
        SourceVector::new(b)
    }

    /// Solve options matching the grid scaling.
    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            tolerance: 1e-11,
            ..SolveOptions::with_exponent(LengthExponent::Two)
        }
    }
}

fn build_sampled(
    grid: &GridSpec,
    sources: Vec<f64>,
    mut conductivity: impl FnMut(usize, usize) -> f64,
) -> Result<SampledNetwork> {
    let positions = (0..grid.n_nodes()).map(|i| grid.node_position(i)).collect();
    let mut edges = Vec::with_capacity(grid.n_edges_total());
    let mut axes = Vec::with_capacity(grid.n_edges_total());
    for k in 0..grid.dim() {
        let h = grid.spacing(k);
        for e in 0..grid.n_edges(k) {
            let (a, b) = grid.edge_nodes(k, e);
            edges.push(Edge::new(a, b, h, conductivity(k, e)));
            axes.push(k);
        }
    }
    Ok(SampledNetwork {
        network: Network::new(positions, edges)?,
        node_sources: sources,
        grid: grid.clone(),
        axes,
    })
}

/// Samples a grid conductivity field as a network. Edge values are taken
/// as stored, so pinned boundary edges carry zero conductivity.
pub fn sample_network_from_fields(
    field: &DiagonalTensorField,
    sources: impl Fn([f64; 2]) -> f64,
    grid: &GridSpec,
) -> Result<SampledNetwork> {
    field.validate(grid)?;
    let s = (0..grid.n_nodes())
        .map(|i| sources(grid.node_position(i)))
        .collect();
    build_sampled(grid, s, |k, e| field.components[k][e])
}

/// Samples closed-form components `c^k` at every edge midpoint.
pub fn sample_network_from_fn(
    c: impl Fn(usize, [f64; 2]) -> f64,
    sources: impl Fn([f64; 2]) -> f64,
    grid: &GridSpec,
) -> Result<SampledNetwork> {
    let s = (0..grid.n_nodes())
        .map(|i| sources(grid.node_position(i)))
        .collect();
    build_sampled(grid, s, |k, e| c(k, grid.edge_midpoint(k, e)))
}

/// Network whose length-exponent-2 Laplacian is the grid Poisson matrix:
/// `C_e = φ_e (r + c)_e` with the boundary face fractions `φ_e`.
pub fn permeability_network(
    field: &DiagonalTensorField,
    grid: &GridSpec,
) -> Result<SampledNetwork> {
    field.validate(grid)?;
    build_sampled(grid, vec![0.0; grid.n_nodes()], |k, e| {
        grid.face_fraction(k, e) * (field.background[k][e] + field.components[k][e])
    })
}

/// One row of a refinement table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub h: f64,
    pub error: f64,
}

/// Errors over a refinement sequence with the fitted convergence order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub label: String,
    pub rows: Vec<TableRow>,
    pub order: f64,
}

impl ErrorTable {
    pub fn new(label: impl Into<String>, rows: Vec<TableRow>) -> Self {
        let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
        let e: Vec<f64> = rows.iter().map(|r| r.error).collect();
        ErrorTable {
            label: label.into(),
            order: fit_order(&h, &e),
            rows,
        }
    }

    /// True when every refinement strictly reduces the error, or all errors
    /// are at roundoff level.
    pub fn is_decreasing(&self) -> bool {
        self.order.is_infinite() || self.rows.windows(2).all(|w| w[1].error < w[0].error)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,residual,fitted_order\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{}", r.h, r.error, self.order);
        }
        out
    }
}

/// Errors below this are treated as exact.
const ROUNDOFF_FLOOR: f64 = 1e-13;

/// Least-squares slope of `log e` against `log h`. Returns `+∞` when every
/// error is at roundoff level and NaN with fewer than two usable points.
pub fn fit_order(h: &[f64], err: &[f64]) -> f64 {
    if err.iter().all(|&e| e.abs() <= ROUNDOFF_FLOOR) {
        return f64::INFINITY;
    }
    let pts: Vec<(f64, f64)> = h
        .iter()
        .zip(err)
        .filter(|(h, e)| **h > 0.0 && **e > 0.0)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn shifted(x: [f64; 2], k: usize, d: f64) -> [f64; 2] {
    let mut y = x;
    y[k] += d;
    y
}

/// `−∇·(c∇p)` by nested central differences with step `eta`.
pub fn divergence_source<'a>(
    c: ComponentFn<'a>,
    p: ScalarFn<'a>,
    dim: usize,
    eta: f64,
) -> impl Fn([f64; 2]) -> f64 + Sync + 'a {
    move |x| {
        let mut s = 0.0;
        for k in 0..dim {
            let flux = |y: [f64; 2]| {
                c(k, y) * (p(shifted(y, k, 0.5 * eta)) - p(shifted(y, k, -0.5 * eta))) / eta
            };
            s -= (flux(shifted(x, k, 0.5 * eta)) - flux(shifted(x, k, -0.5 * eta))) / eta;
        }
        s
    }
}

/// Max-norm residual over interior nodes of `Σ_j C_ij (P_i − P_j)/h² − S_i`
/// with `C`, `P` and `S` sampled from closed forms.
pub fn kirchhoff_residual(c: ComponentFn, p: ScalarFn, s: ScalarFn, grid: &GridSpec) -> f64 {
    let d = grid.dim();
    let mut res = vec![0.0; grid.n_nodes()];
    for k in 0..d {
        let h2 = grid.spacing(k).powi(2);
        for e in 0..grid.n_edges(k) {
            let (a, b) = grid.edge_nodes(k, e);
            let q = c(k, grid.edge_midpoint(k, e))
                * (p(grid.node_position(a)) - p(grid.node_position(b)))
                / h2;
            res[a] += q;
            res[b] -= q;
        }
    }
    (0..grid.n_nodes())
        .filter(|&i| {
            let m = grid.node_multi(i);
            (0..d).all(|k| m[k] > 0 && m[k] < grid.cells(k))
        })
        .map(|i| (res[i] - s(grid.node_position(i))).abs())
        .fold(0.0, f64::max)
}

/// Residual table of the rescaled Kirchhoff law for manufactured `c`, `p`.
/// The source is computed per grid by nested central differences at a
/// tenth of the smallest spacing.
pub fn kirchhoff_consistency(c: ComponentFn, p: ScalarFn, grids: &[GridSpec]) -> ErrorTable {
    let rows = grids
        .par_iter()
        .map(|g| {
            let eta = g.min_spacing() / 10.0;
            let s = divergence_source(c, p, g.dim(), eta);
            TableRow {
                h: g.min_spacing(),
                error: kirchhoff_residual(c, p, &s, g),
            }
        })
        .collect();
    ErrorTable::new("kirchhoff_consistency", rows)
}

/// Max-norm error of the grid Poisson solve for `−Δp = S` with the
/// manufactured no-flux solution `p = Π_k cos(π x̂_k)` in unit coordinates
/// `x̂`, shifted to the discrete gauge.
pub fn poisson_consistency(grids: &[GridSpec]) -> Result<ErrorTable> {
    let rows = grids
        .par_iter()
        .map(|g| {
            let d = g.dim();
            let unit =
                |x: [f64; 2], k: usize| (x[k] - g.lower()[k]) / (g.upper()[k] - g.lower()[k]);
            let exact = |x: [f64; 2]| (0..d).map(|k| (PI * unit(x, k)).cos()).product::<f64>();
            let lap: f64 = (0..d)
                .map(|k| (PI / (g.upper()[k] - g.lower()[k])).powi(2))
                .sum();
            let field = DiagonalTensorField::zeros(g, 1.0)?;
            let p = solve_poisson_grid(&field, &sample_sources(g, |x| lap * exact(x)), g, 1e-12)?;
            let err: Vec<f64> = (0..g.n_nodes())
                .map(|i| p.values[i] - exact(g.node_position(i)))
                .collect();
            let w: Vec<f64> = (0..g.n_nodes()).map(|i| g.node_weight(i)).collect();
            let shift = err.iter().zip(&w).map(|(e, w)| e * w).sum::<f64>() / w.iter().sum::<f64>();
            Ok(TableRow {
                h: g.min_spacing(),
                error: err.iter().map(|e| (e - shift).abs()).fold(0.0, f64::max),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorTable::new("poisson_consistency", rows))
}

/// Five-point Gauss-Legendre nodes and weights on `[-1, 1]`.
const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

fn gauss(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    GL5.iter().map(|&(x, w)| w * f(m + r * x)).sum::<f64>() * r
}

/// Panels per axis for the reference quadrature.
const QUAD_PANELS: usize = 512;

/// Continuum energy `Σ_k ∫ (c^k (∂_k p)² + μ (c^k)^γ)` by composite
/// Gauss-Legendre quadrature.
///
/// With sources the problem must be one-dimensional, where the flux is
/// `c p' = −∫_lo^x S` and the pumping term reduces to `∫ F²/c`.
pub fn continuum_reference_energy(
    c: ComponentFn,
    s: Option<ScalarFn>,
    grid: &GridSpec,
    params: &EnergyParams,
) -> Result<f64> {
    let mu = params.metabolic_coefficient();
    let gamma = params.gamma;
    let d = grid.dim();
    let (lo, hi) = (grid.lower(), grid.upper());
    if d == 1 {
        let hp = (hi[0] - lo[0]) / QUAD_PANELS as f64;
        let mut total = 0.0;
        let mut flux_left = 0.0;
        for j in 0..QUAD_PANELS {
            let a = lo[0] + j as f64 * hp;
            let b = a + hp;
            let cx = |x: f64| c(0, [x, 0.0]);
            total += gauss(|x| mu * cx(x).powf(gamma), a, b);
            if let Some(s) = s {
                let f0 = flux_left;
                total += gauss(
                    |x| {
                        let fx = f0 - gauss(|y| s([y, 0.0]), a, x);
                        fx * fx / cx(x)
                    },
                    a,
                    b,
                );
                flux_left -= gauss(|y| s([y, 0.0]), a, b);
            }
        }
        return Ok(total);
    }
    if s.is_some() {
        return Err(Error::InvalidParameter(
            "reference energy with sources is only available in one dimension".into(),
        ));
    }
    let hx = (hi[0] - lo[0]) / QUAD_PANELS as f64;
    let hy = (hi[1] - lo[1]) / QUAD_PANELS as f64;
    let total = (0..QUAD_PANELS)
        .into_par_iter()
        .map(|i| {
            let a = lo[0] + i as f64 * hx;
            (0..QUAD_PANELS)
                .map(|j| {
                    let b = lo[1] + j as f64 * hy;
                    gauss(
                        |x| {
                            gauss(
                                |y| (0..2).map(|k| mu * c(k, [x, y]).powf(gamma)).sum::<f64>(),
                                b,
                                b + hy,
                            )
                        },
                        a,
                        a + hx,
                    )
                })
                .sum::<f64>()
        })
        .sum();
    Ok(total)
}

/// `Σ (Q²/C + μ C^γ) W^d` on the sampled network, pressures solved with
/// length exponent 2 and sources `w_i S(X_i)`.
pub fn sampled_weighted_energy(sampled: &SampledNetwork, params: &EnergyParams) -> Result<f64> {
    let w = vec![sampled.grid.cell_volume(); sampled.network.n_edges()];
    let src = sampled.kirchhoff_sources()?;
    weighted_energy_per_edge(&sampled.network, &src, params, &w, &sampled.solve_options())
}

/// Gap between the weighted network energy and the continuum energy over a
/// refinement sequence.
pub fn energy_riemann_gap(
    c: ComponentFn,
    s: Option<ScalarFn>,
    grids: &[GridSpec],
    params: &EnergyParams,
) -> Result<ErrorTable> {
    params.validate()?;
    let zero = |_: [f64; 2]| 0.0;
    let rows = grids
        .par_iter()
        .map(|g| {
            let reference = continuum_reference_energy(c, s, g, params)?;
            let sampled = match s {
                Some(s) => sample_network_from_fn(c, s, g)?,
                None => sample_network_from_fn(c, zero, g)?,
            };
            let discrete = sampled_weighted_energy(&sampled, params)?;
            Ok(TableRow {
                h: g.min_spacing(),
                error: (discrete - reference).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorTable::new("energy_riemann_gap", rows))
}

/// Compares a fourth-order finite-difference gradient of
/// `Σ (Q²/C + μ C^γ) w_e` with `−(Q²/C² − ν' C^{γ−1}) w_e` per edge.
///
/// Returns the max deviation relative to the largest closed-form entry. When
/// the closed form vanishes (a fixed point), the scale falls back to a small
/// multiple of the size of its two terms.
pub fn gradient_deviation(
    network: &Network,
    sources: &SourceVector,
    params: &EnergyParams,
    weights: &[f64],
    opts: &SolveOptions,
) -> Result<f64> {
    params.validate()?;
    let state = solve_pressures(network, sources, opts)?;
    let nu_g = params.gradient_coefficient();
    let mut closed = Vec::with_capacity(network.n_edges());
    let mut parts = 0.0f64;
    for ((e, q), w) in network.edges().iter().zip(&state.fluxes).zip(weights) {
        let c = e.conductivity;
        if c <= 0.0 {
            return Err(Error::InvalidParameter(
                "gradient check needs positive conductivities".into(),
            ));
        }
        let pump = (q / c).powi(2) * w;
        let met = nu_g * c.powf(params.gamma - 1.0) * w;
        parts = parts.max(pump + met);
        closed.push(-(pump - met));
    }
    let base = network.conductivities();
    let fd = (0..network.n_edges())
        .into_par_iter()
        .map(|i| {
            let step = 1e-3 * base[i];
            let eval = |delta: f64| -> Result<f64> {
                let mut cs = base.clone();
                cs[i] += delta;
                let net = network.with_conductivities(&cs)?;
                weighted_energy_per_edge(&net, sources, params, weights, opts)
            };
            // fourth-order central stencil
            let d1 = eval(step)? - eval(-step)?;
            let d2 = eval(2.0 * step)? - eval(-2.0 * step)?;
            Ok((8.0 * d1 - d2) / (12.0 * step))
        })
        .collect::<Result<Vec<f64>>>()?;
    let scale = closed
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-6 * parts);
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(fd
        .iter()
        .zip(&closed)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / scale)
}

/// Gradient check with the uniform weight `W^d = Π h_k` on every edge.
pub fn uniform_weight_gradient_check(
    sampled: &SampledNetwork,
    params: &EnergyParams,
) -> Result<f64> {
    let w = vec![sampled.grid.cell_volume(); sampled.network.n_edges()];
    let src = sampled.kirchhoff_sources()?;
    gradient_deviation(&sampled.network, &src, params, &w, &sampled.solve_options())
}

/// Gradient check with per-edge weight `h_k` along the edge axis.
pub fn axis_weight_gradient_check(sampled: &SampledNetwork, params: &EnergyParams) -> Result<f64> {
    let w: Vec<f64> = (0..sampled.network.n_edges())
        .map(|e| sampled.grid.spacing(sampled.edge_axis(e)))
        .collect();
    let src = sampled.kirchhoff_sources()?;
    gradient_deviation(&sampled.network, &src, params, &w, &sampled.solve_options())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::MetabolicForm;
    use crate::kirchhoff::assemble;
    use crate::pde::poisson_matrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(gamma: f64) -> EnergyParams {
        EnergyParams::with_default_alpha(gamma, 1.0, MetabolicForm::OverGamma).unwrap()
    }

    #[test]
    fn constant_field_samples_to_unit_edges() {
        let g = GridSpec::unit(1, 4).unwrap();
        let s = sample_network_from_fn(|_, _| 1.0, |_| 0.0, &g).unwrap();
        assert_eq!(s.network.n_edges(), 4);
        for e in s.network.edges() {
            assert_eq!(e.conductivity, 1.0);
            assert!((e.length - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_field_samples_midpoints() {
        let g = GridSpec::unit(1, 4).unwrap();
        let s = sample_network_from_fn(|_, x| x[0], |_| 0.0, &g).unwrap();
        let c = s.network.conductivities();
        for (v, want) in c.iter().zip([0.125, 0.375, 0.625, 0.875]) {
            assert!((v - want).abs() < 1e-15);
        }
    }

    #[test]
    fn edge_count_matches_grid_combinatorics() {
        let g = GridSpec::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![3, 3]).unwrap();
        let s = sample_network_from_fn(|_, _| 1.0, |_| 0.0, &g).unwrap();
        // 3 cells along one axis times 4 node lines along the other, twice
        assert_eq!(s.network.n_edges(), 2 * 3 * 4);
        assert_eq!(s.network.n_vertices(), 16);
        for e in 0..s.network.n_edges() {
            let k = s.edge_axis(e);
            assert!((s.network.edge(e).length - g.spacing(k)).abs() < 1e-15);
        }
    }

    #[test]
    fn sampled_fields_keep_pinned_edges() {
        let g = GridSpec::unit(2, 4).unwrap();
        let f = DiagonalTensorField::from_fn(&g, 0.1, |_, _| 2.0).unwrap();
        let s = sample_network_from_fields(&f, |_| 0.0, &g).unwrap();
        let zeros = s
            .network
            .conductivities()
            .iter()
            .filter(|&&c| c == 0.0)
            .count();
        // edges lying on the four sides
        assert_eq!(zeros, 4 * 4);
    }

    #[test]
    fn permeability_laplacian_equals_poisson_matrix() {
        let g = GridSpec::new(vec![0.0, 0.0], vec![1.0, 0.75], vec![4, 3]).unwrap();
        let f = DiagonalTensorField::from_fn(&g, 0.1, |k, x| 1.0 + x[0] * x[1] + k as f64).unwrap();
        let s = permeability_network(&f, &g).unwrap();
        let lap = assemble(&s.network, LengthExponent::Two);
        let pm = poisson_matrix(&f, &g);
        for i in 0..g.n_nodes() {
            for j in 0..g.n_nodes() {
                let (a, b) = (lap.entry(i, j), pm.get(i, j));
                assert!(
                    (a - b).abs() <= 1e-13 * (1.0 + b.abs()),
                    "({i},{j}) {a} {b}"
                );
            }
        }
    }

    #[test]
    fn permeability_solve_matches_grid_solve() {
        let g = GridSpec::unit(2, 6).unwrap();
        let f = DiagonalTensorField::from_fn(&g, 0.2, |_, x| 1.0 + x[0]).unwrap();
        let src = |x: [f64; 2]| (PI * x[0]).cos() * (PI * x[1]).cos();
        let grid_p =
            solve_poisson_grid(&f, &crate::pde::sample_sources(&g, src), &g, 1e-12).unwrap();
        let mut s = permeability_network(&f, &g).unwrap();
        s.node_sources = crate::pde::sample_sources(&g, src);
        let net_p = solve_pressures(
            &s.network,
            &s.kirchhoff_sources().unwrap(),
            &s.solve_options(),
        )
        .unwrap();
        let shift = net_p.pressures[0] - grid_p.values[0];
        for (a, b) in net_p.pressures.iter().zip(&grid_p.values) {
            assert!((a - shift - b).abs() < 1e-9);
        }
    }

    #[test]
    fn poisson_table_converges() {
        let grids: Vec<_> = [8, 16, 32]
            .iter()
            .map(|&n| GridSpec::unit(2, n).unwrap())
            .collect();
        let t = poisson_consistency(&grids).unwrap();
        assert!(t.is_decreasing() && t.order >= 1.0, "{t:?}");
        let csv = t.to_csv();
        assert!(csv.starts_with("h,residual,fitted_order\n"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn fit_order_recovers_power_law() {
        let h = [0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|h| 3.0 * h * h).collect();
        assert!((fit_order(&h, &e) - 2.0).abs() < 1e-12);
        assert!(fit_order(&h, &[0.0, 0.0, 0.0]).is_infinite());
    }

    #[test]
    fn residual_exact_on_linear_pressure() {
        let g = GridSpec::unit(1, 8).unwrap();
        let r = kirchhoff_residual(&|_, _| 3.0, &|x| 2.0 * x[0] - 1.0, &|_| 0.0, &g);
        assert!(r < 1e-12, "{r}");
    }

    #[test]
    fn kirchhoff_residual_converges_1d() {
        let grids: Vec<_> = [16, 32, 64]
            .iter()
            .map(|&n| GridSpec::unit(1, n).unwrap())
            .collect();
        let t = kirchhoff_consistency(
            &|_, x| 2.0 + (2.0 * PI * x[0]).cos(),
            &|x| (2.0 * PI * x[0]).sin(),
            &grids,
        );
        assert!(t.is_decreasing(), "{t:?}");
        assert!(t.order >= 1.0, "{t:?}");
    }

    #[test]
    fn kirchhoff_residual_converges_2d() {
        let grids: Vec<_> = [8, 16, 32]
            .iter()
            .map(|&n| GridSpec::unit(2, n).unwrap())
            .collect();
        let c = |k: usize, x: [f64; 2]| (1.5 + x[0] * x[0]) * (1.0 + 0.5 * x[1]) + k as f64;
        let p = |x: [f64; 2]| (PI * x[0]).sin() * (PI * x[1]).cos();
        let t = kirchhoff_consistency(&c, &p, &grids);
        assert!(t.is_decreasing(), "{t:?}");
        assert!(t.order >= 1.0, "{t:?}");
    }

    #[test]
    fn nested_differences_match_analytic_source() {
        // c = 1 + x, p = x² gives −(c p')' = −(2x + 2x²)' = −2 − 4x
        let s = divergence_source(&|_, x| 1.0 + x[0], &|x| x[0] * x[0], 1, 1e-3);
        for x in [0.1, 0.5, 0.9] {
            assert!((s([x, 0.0]) + 2.0 + 4.0 * x).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_field_gap_is_boundary_defect() {
        let p = params(1.5);
        let kappa: f64 = 0.7;
        let grids: Vec<_> = [4, 8, 16]
            .iter()
            .map(|&n| GridSpec::unit(2, n).unwrap())
            .collect();
        let t = energy_riemann_gap(&|_, _| kappa, None, &grids, &p).unwrap();
        let mu = p.metabolic_coefficient();
        for (row, n) in t.rows.iter().zip([4.0, 8.0, 16.0]) {
            // each axis has n(n+1) edges of weight 1/n², against area 1
            let want = 2.0 * mu * kappa.powf(1.5) / n;
            assert!((row.error - want).abs() < 1e-10, "{row:?} {want}");
        }
        assert!((t.order - 1.0).abs() < 1e-9);
    }

    #[test]
    fn vanishing_field_has_no_gap() {
        let grids: Vec<_> = [4, 8, 16]
            .iter()
            .map(|&n| GridSpec::unit(1, n).unwrap())
            .collect();
        let t = energy_riemann_gap(&|_, _| 0.0, None, &grids, &params(1.5)).unwrap();
        assert!(t.rows.iter().all(|r| r.error == 0.0));
    }

    #[test]
    fn smooth_field_gap_converges() {
        let grids: Vec<_> = [8, 16, 32]
            .iter()
            .map(|&n| GridSpec::unit(1, n).unwrap())
            .collect();
        let t = energy_riemann_gap(
            &|_, x| 1.0 + x[0] * (1.0 - x[0]),
            None,
            &grids,
            &params(1.5),
        )
        .unwrap();
        assert!(t.is_decreasing() && t.order >= 1.0, "{t:?}");
    }

    #[test]
    fn gap_with_sources_converges() {
        let grids: Vec<_> = [8, 16, 32, 64]
            .iter()
            .map(|&n| GridSpec::unit(1, n).unwrap())
            .collect();
        let t = energy_riemann_gap(
            &|_, x| 1.0 + x[0] * (1.0 - x[0]),
            Some(&|x| (PI * x[0]).cos()),
            &grids,
            &params(1.5),
        )
        .unwrap();
        assert!(t.is_decreasing() && t.order >= 1.0, "{t:?}");
    }

    #[test]
    fn reference_pumping_energy_closed_form() {
        // c = 1, S = cos(πx): flux F = −sin(πx)/π and ∫ F² = 1/(2π²)
        let g = GridSpec::unit(1, 4).unwrap();
        let p = params(1.0);
        let e =
            continuum_reference_energy(&|_, _| 1.0, Some(&|x| (PI * x[0]).cos()), &g, &p).unwrap();
        let want = 1.0 / (2.0 * PI * PI) + p.metabolic_coefficient();
        assert!((e - want).abs() < 1e-12, "{e} {want}");
    }

    #[test]
    fn single_edge_fixed_point_has_zero_gradient() {
        // one cell with sources ±s: the graph source is ±s/2
        let g = GridSpec::unit(1, 1).unwrap();
        let p = params(1.5);
        let s = 2.0;
        let q: f64 = s / 2.0;
        // Q²/C² = ν' C^{γ−1} at C = (Q²/ν')^{1/(γ+1)}
        let c = (q * q / p.gradient_coefficient()).powf(1.0 / (p.gamma + 1.0));
        let sampled =
            sample_network_from_fn(|_, _| c, |x| if x[0] < 0.5 { s } else { -s }, &g).unwrap();
        let dev = uniform_weight_gradient_check(&sampled, &p).unwrap();
        assert!(dev < 1e-5, "{dev}");
    }

    #[test]
    fn uniform_weights_reproduce_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = GridSpec::unit(2, 3).unwrap();
        let vals: Vec<f64> = (0..g.n_edges_total())
            .map(|_| rng.gen_range(0.5..2.0))
            .collect();
        let mut it = vals.into_iter();
        let sampled = build_sampled(
            &g,
            crate::pde::sample_sources(&g, |x| (PI * x[0]).cos() + (PI * x[1]).cos()),
            |_, _| it.next().unwrap(),
        )
        .unwrap();
        assert_eq!(sampled.network.n_vertices(), 16);
        let dev = uniform_weight_gradient_check(&sampled, &params(1.5)).unwrap();
        assert!(dev <= 1e-5, "{dev}");
    }

    #[test]
    fn axis_weights_break_gradient_structure() {
        let g = GridSpec::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![3, 6]).unwrap();
        let sampled = sample_network_from_fn(
            |k, x| 1.0 + 0.5 * x[0] * x[1] + 0.2 * k as f64,
            |x| 4.0 * (PI * x[0]).cos() * (PI * x[1]).cos(),
            &g,
        )
        .unwrap();
        let p = params(1.5);
        assert!(uniform_weight_gradient_check(&sampled, &p).unwrap() <= 1e-5);
        let dev = axis_weight_gradient_check(&sampled, &p).unwrap();
        assert!(dev >= 1e-2, "{dev}");
    }
}
