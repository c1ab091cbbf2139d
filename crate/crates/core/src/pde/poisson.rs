use serde::{Deserialize, Serialize};

use super::grid::{DiagonalTensorField, GridSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, CsrMatrix};

/// Node pressures with zero weighted mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureField {
    pub values: Vec<f64>,
    pub residual: f64,
}

/// Sources sampled at the grid nodes.
pub fn sample_sources(grid: &GridSpec, s: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    (0..grid.n_nodes())
        .map(|i| s(grid.node_position(i)))
        .collect()
}

/// Graph Laplacian with edge weights `φ_e (r + c)_e / h_k²`, where `φ_e` is
/// the face fraction of [`GridSpec::face_fraction`].
pub fn poisson_matrix(field: &DiagonalTensorField, grid: &GridSpec) -> CsrMatrix {
    let mut trip = Vec::new();
    for k in 0..grid.dim() {
        let h2 = grid.spacing(k).powi(2);
        for e in 0..grid.n_edges(k) {
            let w =
                grid.face_fraction(k, e) * (field.background[k][e] + field.components[k][e]) / h2;
            let (a, b) = grid.edge_nodes(k, e);
            trip.push((a, a, w));
            trip.push((b, b, w));
            trip.push((a, b, -w));
            trip.push((b, a, -w));
        }
    }
    CsrMatrix::from_triplets(grid.n_nodes(), &trip)
}

/// Right-hand side `w_i S_i` with half-cell boundary weights, checked for
/// compatibility and projected onto mean zero.
pub(crate) fn weighted_rhs(sources: &[f64], grid: &GridSpec) -> Result<Vec<f64>> {
    if sources.len() != grid.n_nodes() {
        return Err(Error::DimensionMismatch {
            expected: grid.n_nodes(),
            got: sources.len(),
        });
    }
    let w: Vec<f64> = (0..grid.n_nodes()).map(|i| grid.node_weight(i)).collect();
    let mut b: Vec<f64> = sources.iter().zip(&w).map(|(s, w)| s * w).collect();
    let sum: f64 = b.iter().sum();
    let scale: f64 = b.iter().map(|v| v.abs()).sum();
    if sum.abs() > 1e-8 * scale {
        return Err(Error::IncompatibleSources {
            sum: sum * grid.cell_volume(),
        });
    }
    let wsum: f64 = w.iter().sum();
    for (bi, wi) in b.iter_mut().zip(&w) {
        *bi -= sum / wsum * wi;
    }
    Ok(b)
}

/// Solves the no-flux pressure problem `−∇·((r + c)∇p) = S`.
///
/// Interior rows are the flux-form five-point scheme. Boundary rows are the
/// finite-volume balance over the half (or quarter) cell, divided by the full
/// cell volume: the right-hand side is `w_i S_i` and edges along the boundary
/// carry half their coefficient.
pub fn solve_poisson_grid(
    field: &DiagonalTensorField,
    sources: &[f64],
    grid: &GridSpec,
    tol: f64,
) -> Result<PressureField> {
    solve_poisson_warm(field, sources, grid, tol, None)
}

pub(crate) fn solve_poisson_warm(
    field: &DiagonalTensorField,
    sources: &[f64],
    grid: &GridSpec,
    tol: f64,
    guess: Option<&[f64]>,
) -> Result<PressureField> {
    field.validate(grid)?;
    let b = weighted_rhs(sources, grid)?;
    let n = grid.n_nodes();
    let bnorm = linalg::norm2(&b);
    if bnorm == 0.0 {
        return Ok(PressureField {
            values: vec![0.0; n],
            residual: 0.0,
        });
    }
    let a = poisson_matrix(field, grid);
    // CG on the singular but consistent system; the null space is fixed
    // afterwards by the gauge
    let mut x: Vec<f64> = match guess {
        Some(g) => g.to_vec(),
        None => vec![0.0; n],
    };
    for _ in 0..4 {
        let st = linalg::pcg(&a, &b, &mut x, 0.5 * tol * bnorm, 50 * n + 1000);
        if st.residual <= 0.5 * tol * bnorm {
            break;
        }
    }
    let w: Vec<f64> = (0..n).map(|i| grid.node_weight(i)).collect();
    let mean = linalg::dot(&x, &w) / w.iter().sum::<f64>();
    for v in &mut x {
        *v -= mean;
    }
    let mut ax = vec![0.0; n];
    a.mul_vec(&x, &mut ax);
    let residual = ax
        .iter()
        .zip(&b)
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt();
    if !residual.is_finite() || residual > tol * bnorm {
        return Err(Error::SolverNotConverged {
            residual,
            target: tol * bnorm,
        });
    }
    Ok(PressureField {
        values: x,
        residual,
    })
}

/// `(∂_k p)²` at the midpoints of the axis-`k` edges.
pub fn pressure_gradient_sq(pressure: &[f64], grid: &GridSpec) -> Vec<Vec<f64>> {
    (0..grid.dim())
        .map(|k| {
            let h = grid.spacing(k);
            (0..grid.n_edges(k))
                .map(|e| {
                    let (a, b) = grid.edge_nodes(k, e);
                    let g = (pressure[b] - pressure[a]) / h;
                    g * g
                })
                .collect()
        })
        .collect()
}
