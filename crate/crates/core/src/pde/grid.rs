use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

/// Uniform tensor-product grid on a box in one or two dimensions.
///
/// Nodes are numbered with axis 0 fastest. Component `k` of a diagonal field
/// lives on the midpoints of the edges along axis `k`; there are
/// `cells_k · Π_{l≠k} nodes_l` of them, again numbered with axis 0 fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    lower: Vec<f64>,
    upper: Vec<f64>,
    cells: Vec<usize>,
}

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, cells: Vec<usize>) -> Result<Self> {
        let d = cells.len();
        if !(d == 1 || d == 2) || lower.len() != d || upper.len() != d {
            return Err(Error::InvalidParameter(format!(
                "grid dimension must be 1 or 2 with matching bounds, got {d}"
            )));
        }
        for k in 0..d {
            if !(upper[k] > lower[k]) || cells[k] < 1 {
                return Err(Error::InvalidParameter(format!(
                    "axis {k}: need upper > lower and at least one cell"
                )));
            }
        }
        Ok(GridSpec {
            lower,
            upper,
            cells,
        })
    }

    /// `(0,1)^d` with `n` cells per axis.
    pub fn unit(d: usize, n: usize) -> Result<Self> {
        GridSpec::new(vec![0.0; d], vec![1.0; d], vec![n; d])
    }

    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn cells(&self, k: usize) -> usize {
        self.cells[k]
    }

    pub fn nodes(&self, k: usize) -> usize {
        self.cells[k] + 1
    }

    pub fn spacing(&self, k: usize) -> f64 {
        (self.upper[k] - self.lower[k]) / self.cells[k] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.dim())
            .map(|k| self.spacing(k))
            .fold(f64::INFINITY, f64::min)
    }

    /// `W^d = Π h_k`.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.spacing(k)).product()
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim())
            .map(|k| self.upper[k] - self.lower[k])
            .product()
    }

    pub fn is_equidistant(&self) -> bool {
        let h0 = self.spacing(0);
        (0..self.dim()).all(|k| (self.spacing(k) - h0).abs() <= 1e-12 * h0)
    }

    pub fn n_nodes(&self) -> usize {
        (0..self.dim()).map(|k| self.nodes(k)).product()
    }

    pub fn node_multi(&self, idx: usize) -> [usize; 2] {
        let nx = self.nodes(0);
        [idx % nx, idx / nx]
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        i + self.nodes(0) * j
    }

    /// Node coordinates; the second entry is 0 in one dimension.
    pub fn node_position(&self, idx: usize) -> [f64; 2] {
        let m = self.node_multi(idx);
        let mut x = [0.0; 2];
        for k in 0..self.dim() {
            x[k] = self.lower[k] + m[k] as f64 * self.spacing(k);
        }
        x
    }

    /// Finite-volume weight of a node: `1/2` per axis on which it lies on the
    /// boundary.
    pub fn node_weight(&self, idx: usize) -> f64 {
        let m = self.node_multi(idx);
        let mut w = 1.0;
        for k in 0..self.dim() {
            if m[k] == 0 || m[k] == self.cells[k] {
                w *= 0.5;
            }
        }
        w
    }

    fn edge_extent(&self, k: usize) -> [usize; 2] {
        let mut ext = [1, 1];
        for (l, e) in ext.iter_mut().enumerate().take(self.dim()) {
            *e = if l == k { self.cells[l] } else { self.nodes(l) };
        }
        ext
    }

    pub fn n_edges(&self, k: usize) -> usize {
        let e = self.edge_extent(k);
        e[0] * e[1]
    }

    pub fn n_edges_total(&self) -> usize {
        (0..self.dim()).map(|k| self.n_edges(k)).sum()
    }

    pub fn edge_multi(&self, k: usize, e: usize) -> [usize; 2] {
        let ext = self.edge_extent(k);
        [e % ext[0], e / ext[0]]
    }

    pub fn edge_index(&self, k: usize, m: [usize; 2]) -> usize {
        m[0] + self.edge_extent(k)[0] * m[1]
    }

    /// Nodes joined by edge `e` of axis `k`, lower one first.
    pub fn edge_nodes(&self, k: usize, e: usize) -> (usize, usize) {
        let m = self.edge_multi(k, e);
        let a = self.node_index(m[0], m[1]);
        let mut b = m;
        b[k] += 1;
        (a, self.node_index(b[0], b[1]))
    }

    pub fn edge_midpoint(&self, k: usize, e: usize) -> [f64; 2] {
        let m = self.edge_multi(k, e);
        let mut x = [0.0; 2];
        for l in 0..self.dim() {
            let shift = if l == k { 0.5 } else { 0.0 };
            x[l] = self.lower[l] + (m[l] as f64 + shift) * self.spacing(l);
        }
        x
    }

    /// Edges lying on the boundary (only possible across axes other than
    /// `k`); their conductivity is held at zero.
    pub fn edge_is_pinned(&self, k: usize, e: usize) -> bool {
        let m = self.edge_multi(k, e);
        (0..self.dim()).any(|l| l != k && (m[l] == 0 || m[l] == self.cells[l]))
    }

    /// Fraction of the full dual face crossed by edge `e` of axis `k`: `1/2`
    /// per other axis on which the edge lies on the boundary.
    pub fn face_fraction(&self, k: usize, e: usize) -> f64 {
        let m = self.edge_multi(k, e);
        let mut f = 1.0;
        for l in 0..self.dim() {
            if l != k && (m[l] == 0 || m[l] == self.cells[l]) {
                f *= 0.5;
            }
        }
        f
    }

    /// Discrete Laplacian acting on component `k`: reflected ghosts along
    /// axis `k`, pinned zero rows across the others. Pinned rows and
    /// columns are empty.
    pub fn laplacian(&self, k: usize) -> CsrMatrix {
        let n = self.n_edges(k);
        let ext = self.edge_extent(k);
        let mut trip = Vec::with_capacity(5 * n);
        for e in 0..n {
            if self.edge_is_pinned(k, e) {
                continue;
            }
            let m = self.edge_multi(k, e);
            for l in 0..self.dim() {
                let h2 = self.spacing(l).powi(2);
                let mut diag = -2.0 / h2;
                for step in [-1i64, 1] {
                    let pos = m[l] as i64 + step;
                    if pos < 0 || pos >= ext[l] as i64 {
                        if l == k {
                            diag -= 1.0 / h2;
                        }
                        continue;
                    }
                    let mut nb = m;
                    nb[l] = pos as usize;
                    let f = self.edge_index(k, nb);
                    if !self.edge_is_pinned(k, f) {
                        trip.push((e, f, 1.0 / h2));
                    }
                }
                trip.push((e, e, diag));
            }
        }
        CsrMatrix::from_triplets(n, &trip)
    }
}

/// Nonnegative diagonal conductivity field `c^k` plus background
/// permeability `r ≥ r₀ > 0` on the same staggered locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalTensorField {
    pub components: Vec<Vec<f64>>,
    pub background: Vec<Vec<f64>>,
    pub r0: f64,
}

impl DiagonalTensorField {
    pub fn new(
        grid: &GridSpec,
        components: Vec<Vec<f64>>,
        background: Vec<Vec<f64>>,
        r0: f64,
    ) -> Result<Self> {
        let f = DiagonalTensorField {
            components,
            background,
            r0,
        };
        f.validate(grid)?;
        Ok(f)
    }

    /// Samples `c(k, x)` at the midpoints with a constant background `r`.
    /// Pinned boundary edges are set to zero.
    pub fn from_fn(grid: &GridSpec, r: f64, c: impl Fn(usize, [f64; 2]) -> f64) -> Result<Self> {
        let components = (0..grid.dim())
            .map(|k| {
                (0..grid.n_edges(k))
                    .map(|e| {
                        if grid.edge_is_pinned(k, e) {
                            0.0
                        } else {
                            c(k, grid.edge_midpoint(k, e))
                        }
                    })
                    .collect()
            })
            .collect();
        let background = (0..grid.dim()).map(|k| vec![r; grid.n_edges(k)]).collect();
        DiagonalTensorField::new(grid, components, background, r)
    }

    pub fn zeros(grid: &GridSpec, r: f64) -> Result<Self> {
        DiagonalTensorField::from_fn(grid, r, |_, _| 0.0)
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        let d = grid.dim();
        if self.components.len() != d || self.background.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.components.len(),
            });
        }
        if !(self.r0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "r0 must be > 0, got {}",
                self.r0
            )));
        }
        for k in 0..d {
            let n = grid.n_edges(k);
            if self.components[k].len() != n || self.background[k].len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: self.components[k].len(),
                });
            }
            for e in 0..n {
                let c = self.components[k][e];
                if !c.is_finite() {
                    return Err(Error::NonFinite("conductivity field"));
                }
                if c < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "c^{k}[{e}] = {c} is negative"
                    )));
                }
                if grid.edge_is_pinned(k, e) && c != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "c^{k}[{e}] lies on the boundary and must be 0"
                    )));
                }
                if !(self.background[k][e] >= self.r0) {
                    return Err(Error::InvalidParameter(format!(
                        "background permeability {} below r0 = {}",
                        self.background[k][e], self.r0
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn min_value(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
