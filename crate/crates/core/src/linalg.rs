//! Sparse storage and the linear solvers shared by the graph and grid
//! pressure problems.

use nalgebra::{DMatrix, DVector};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Assembles an `n × n` matrix from triplets, summing duplicates.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(r, c, v) in triplets {
            rows[r].push((c, v));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        match self.col_idx[lo..hi].binary_search(&c) {
            Ok(k) => self.values[lo + k],
            Err(_) => 0.0,
        }
    }

    /// Iterator over `(column, value)` of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate().take(self.n) {
            let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let mut acc = 0.0;
            for k in lo..hi {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out = acc;
        }
    }

    /// Principal submatrix keeping only the rows/columns where `keep` is true,
    /// renumbered in increasing order.
    pub fn restrict(&self, keep: &[bool]) -> CsrMatrix {
        let mut map = vec![usize::MAX; self.n];
        let mut m = 0;
        for (i, &k) in keep.iter().enumerate() {
            if k {
                map[i] = m;
                m += 1;
            }
        }
        let mut trip = Vec::with_capacity(self.nnz());
        for r in 0..self.n {
            if !keep[r] {
                continue;
            }
            for (c, v) in self.row(r) {
                if keep[c] {
                    trip.push((map[r], map[c], v));
                }
            }
        }
        CsrMatrix::from_triplets(m, &trip)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                d[(r, c)] += v;
            }
        }
        d
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// definite system. Iterates from `x` (used as the initial guess) until
/// `‖b − A x‖₂ ≤ abs_tol` or `max_iter` is reached.
pub fn pcg(a: &CsrMatrix, b: &[f64], x: &mut [f64], abs_tol: f64, max_iter: usize) -> SolveStats {
    let n = a.dim();
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut ax = vec![0.0; n];
    a.mul_vec(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut res = norm2(&r);
    if res <= abs_tol {
        return SolveStats {
            iterations: 0,
            residual: res,
        };
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return SolveStats {
                iterations: it,
                residual: res,
            };
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        res = norm2(&r);
        if res <= abs_tol {
            return SolveStats {
                iterations: it,
                residual: res,
            };
        }
        for k in 0..n {
            z[k] = r[k] * inv_diag[k];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    // recompute the true residual; the recurrence drifts on hard problems
    a.mul_vec(x, &mut ax);
    let true_res = norm2(
        &b.iter()
            .zip(&ax)
            .map(|(bi, ai)| bi - ai)
            .collect::<Vec<_>>(),
    );
    SolveStats {
        iterations: max_iter,
        residual: true_res,
    }
}

/// Dense Cholesky solve; `None` if the matrix is not numerically SPD.
pub fn dense_spd_solve(a: &CsrMatrix, b: &[f64]) -> Option<Vec<f64>> {
    let chol = a.to_dense().cholesky()?;
    let x = chol.solve(&DVector::from_column_slice(b));
    Some(x.iter().copied().collect())
}

/// Minimum-norm least-squares solution of `A x = b` via SVD.
pub fn least_squares_solve(a: &CsrMatrix, b: &[f64]) -> Option<Vec<f64>> {
    let svd = a.to_dense().svd(true, true);
    let x = svd.solve(&DVector::from_column_slice(b), 1e-13).ok()?;
    Some(x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lap1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, &t)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let m = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 0, -1.0)]);
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(1, 0), -1.0);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn cg_matches_cholesky() {
        let a = lap1d(30);
        let b: Vec<f64> = (0..30).map(|k| (k as f64 * 0.37).sin()).collect();
        let direct = dense_spd_solve(&a, &b).unwrap();
        let mut x = vec![0.0; 30];
        let st = pcg(&a, &b, &mut x, 1e-12, 500);
        assert!(st.residual <= 1e-12);
        for (u, v) in x.iter().zip(&direct) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn restrict_drops_rows_and_columns() {
        let a = lap1d(3);
        let r = a.restrict(&[true, false, true]);
        assert_eq!(r.dim(), 2);
        assert_eq!(r.get(0, 1), 0.0);
        assert_eq!(r.get(1, 1), 2.0);
    }
}
