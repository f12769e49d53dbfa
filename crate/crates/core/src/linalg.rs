//! Sparse symmetric matrices and the linear solvers used by assembly and
//! time stepping.
//!
//! Only the upper triangle is stored, so symmetry holds structurally. Solves
//! use a banded Cholesky factorization; systems above
//! [`DIRECT_SOLVE_LIMIT`] unknowns fall back to Jacobi-preconditioned
//! conjugate gradients.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Above this many unknowns [`Factorization::new`] switches to CG.
pub const DIRECT_SOLVE_LIMIT: usize = 50_000;

/// Collects `(row, col, value)` contributions of a symmetric matrix.
///
/// Entries are folded into the upper triangle; a contribution at `(i, j)` and
/// one at `(j, i)` land on the same stored entry, so callers add each
/// off-diagonal coupling once.
#[derive(Debug, Clone)]
pub struct SymBuilder {
    dim: usize,
    entries: BTreeMap<(usize, usize), f64>,
}

impl SymBuilder {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(i < self.dim && j < self.dim);
        let key = if i <= j { (i, j) } else { (j, i) };
        *self.entries.entry(key).or_insert(0.0) += value;
    }

    pub fn build(self) -> SymSparseMatrix {
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals = Vec::with_capacity(self.entries.len());
        for (&(i, j), &v) in &self.entries {
            row_ptr[i + 1] += 1;
            cols.push(j);
            vals.push(v);
        }
        for i in 0..self.dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        SymSparseMatrix {
            dim: self.dim,
            row_ptr,
            cols,
            vals,
        }
    }
}

/// Symmetric sparse matrix in upper-triangular CSR storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymSparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SymSparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymBuilder::new(dim).build()
    }

    pub fn identity(dim: usize) -> Self {
        let mut b = SymBuilder::new(dim);
        for i in 0..dim {
            b.add(i, i, 1.0);
        }
        b.build()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stored (upper-triangular) nonzeros.
    pub fn nnz_upper(&self) -> usize {
        self.vals.len()
    }

    /// Iterates the stored upper triangle as `(row, col, value)` with `row <= col`.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (i, self.cols[p], self.vals[p]))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        let row = &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]];
        match row.binary_search(&c) {
            Ok(p) => self.vals[self.row_ptr[r] + p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        let mut y = vec![0.0; self.dim];
        for i in 0..self.dim {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[p];
                let v = self.vals[p];
                y[i] += v * x[j];
                if j != i {
                    y[j] += v * x[i];
                }
            }
        }
        y
    }

    /// `|A| x` with entrywise absolute values.
    pub fn abs_matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for i in 0..self.dim {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[p];
                let v = self.vals[p].abs();
                y[i] += v * x[j].abs();
                if j != i {
                    y[j] += v * x[i].abs();
                }
            }
        }
        y
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.matvec(y))
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `a·self + b·other` on the union pattern.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut builder = SymBuilder::new(self.dim);
        for (i, j, v) in self.upper_entries() {
            builder.add(i, j, a * v);
        }
        for (i, j, v) in other.upper_entries() {
            builder.add(i, j, b * v);
        }
        builder.build()
    }

    /// Stored values in pattern order.
    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    pub fn same_pattern(&self, other: &Self) -> bool {
        self.dim == other.dim && self.row_ptr == other.row_ptr && self.cols == other.cols
    }

    /// Same sparsity pattern with new values.
    pub fn with_values(&self, vals: Vec<f64>) -> Self {
        assert_eq!(vals.len(), self.vals.len());
        Self {
            dim: self.dim,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals,
        }
    }

    /// `I_d ⊗ self` in the interleaved layout: index `i·d + β`.
    pub fn kron_identity(&self, d: usize) -> Self {
        let mut builder = SymBuilder::new(self.dim * d);
        for (i, j, v) in self.upper_entries() {
            for b in 0..d {
                builder.add(i * d + b, j * d + b, v);
            }
        }
        builder.build()
    }

    /// Largest stored magnitude.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest half-bandwidth `max (j - i)` over stored entries.
    pub fn bandwidth(&self) -> usize {
        self.upper_entries().map(|(i, j, _)| j - i).max().unwrap_or(0)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.upper_entries() {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m
    }

    /// Coordinate text export: one `row col value` line per nonzero of the
    /// full matrix, 0-based, sorted by row then column.
    pub fn to_coordinate_text(&self) -> String {
        let mut full: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * self.vals.len());
        for (i, j, v) in self.upper_entries() {
            full.push((i, j, v));
            if i != j {
                full.push((j, i, v));
            }
        }
        full.sort_by_key(|&(i, j, _)| (i, j));
        let mut out = String::new();
        for (i, j, v) in full {
            let _ = writeln!(out, "{i} {j} {v:.17e}");
        }
        out
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Banded Cholesky factor `A = L Lᵀ`, stored row-wise: `band[i][k]` holds
/// `L[i][i - bw + k]`.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    dim: usize,
    bw: usize,
    band: Vec<f64>,
}

impl BandCholesky {
    pub fn new(a: &SymSparseMatrix) -> Result<Self> {
        let dim = a.dim();
        let bw = a.bandwidth();
        let width = bw + 1;
        let mut band = vec![0.0; dim * width];
        // lower triangle L[j][i] = A[i][j] for i <= j: row j, column i
        for (i, j, v) in a.upper_entries() {
            band[j * width + (i + bw - j)] = v;
        }
        for j in 0..dim {
            let j0 = j.saturating_sub(bw);
            for i in j0..=j {
                let i0 = i.saturating_sub(bw).max(j0);
                let mut s = band[j * width + (i + bw - j)];
                for k in i0..i {
                    s -= band[j * width + (k + bw - j)] * band[i * width + (k + bw - i)];
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite { row: j, pivot: s });
                    }
                    band[j * width + bw] = s.sqrt();
                } else {
                    band[j * width + (i + bw - j)] = s / band[i * width + bw];
                }
            }
        }
        Ok(Self { dim, bw, band })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.dim);
        let width = self.bw + 1;
        let mut y = b.to_vec();
        for i in 0..self.dim {
            let i0 = i.saturating_sub(self.bw);
            let mut s = y[i];
            for k in i0..i {
                s -= self.band[i * width + (k + self.bw - i)] * y[k];
            }
            y[i] = s / self.band[i * width + self.bw];
        }
        for i in (0..self.dim).rev() {
            let i1 = (i + self.bw).min(self.dim - 1);
            let mut s = y[i];
            for k in i + 1..=i1 {
                s -= self.band[k * width + (i + self.bw - k)] * y[k];
            }
            y[i] = s / self.band[i * width + self.bw];
        }
        y
    }
}

/// Result of a conjugate-gradient solve.
#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients.
pub fn conjugate_gradient(
    a: &SymSparseMatrix,
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<CgOutcome> {
    let n = a.dim();
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let b_norm = norm2(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(CgOutcome {
            x,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        let ap = a.matvec(&p);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = norm2(&r) / b_norm;
        if res <= rel_tol {
            return Ok(CgOutcome {
                x,
                iterations: it,
                relative_residual: res,
            });
        }
        z = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let residual = norm2(&r) / b_norm;
    Err(Error::SolverNotConverged {
        residual,
        iterations: max_iter,
    })
}

/// A reusable solver for one symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub enum Factorization {
    Banded(BandCholesky),
    Iterative(SymSparseMatrix),
}

impl Factorization {
    pub fn new(a: &SymSparseMatrix) -> Result<Self> {
        if a.dim() > DIRECT_SOLVE_LIMIT {
            Ok(Factorization::Iterative(a.clone()))
        } else {
            Ok(Factorization::Banded(BandCholesky::new(a)?))
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        match self {
            Factorization::Banded(chol) => Ok(chol.solve(b)),
            Factorization::Iterative(a) => {
                Ok(conjugate_gradient(a, b, 1e-11, 10 * a.dim().max(1))?.x)
            }
        }
    }
}

/// One-shot solve of `A x = b`.
pub fn solve_spd(a: &SymSparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    Factorization::new(a)?.solve(b)
}

/// Smallest eigenvalue of the symmetric-definite pencil `(a, b)`, dense.
pub fn min_generalized_eigenvalue(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    generalized_eigenvalues(a, b).map(|ev| ev.into_iter().fold(f64::INFINITY, f64::min))
}

/// All eigenvalues of `a x = λ b x` with `b` symmetric positive definite.
pub fn generalized_eigenvalues(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("pencil matrix is not positive definite".into()))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let c = &l_inv * a * l_inv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let mut ev: Vec<f64> = c.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymSparseMatrix {
        let mut b = SymBuilder::new(n);
        for i in 0..n {
            b.add(i, i, 2.0);
            if i + 1 < n {
                b.add(i, i + 1, -1.0);
            }
        }
        b.build()
    }

    #[test]
    fn builder_folds_into_upper_triangle() {
        let mut b = SymBuilder::new(3);
        b.add(2, 0, 1.5);
        b.add(0, 2, 0.5);
        b.add(1, 1, 4.0);
        let m = b.build();
        assert_eq!(m.get(0, 2), 2.0);
        assert_eq!(m.get(2, 0), 2.0);
        assert_eq!(m.nnz_upper(), 2);
        assert_eq!(m.bandwidth(), 2);
    }

    #[test]
    fn matvec_uses_both_triangles() {
        let a = laplacian(4);
        let y = a.matvec(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(y, vec![0.0, 0.0, 0.0, 5.0]);
    }

    #[test]
    fn cholesky_matches_dense_solve() {
        let a = laplacian(30).lin_comb(1.0, &SymSparseMatrix::identity(30), 0.1);
        let b: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let x = BandCholesky::new(&a).unwrap().solve(&b);
        let r: Vec<f64> = a.matvec(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm2(&r) < 1e-12);
        let dense = a.to_dense().lu().solve(&nalgebra::DVector::from_vec(b)).unwrap();
        for (u, v) in x.iter().zip(dense.iter()) {
            assert!((u - v).abs() < 1e-11);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = laplacian(5).scaled(-1.0);
        assert!(matches!(
            BandCholesky::new(&a),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn cg_agrees_with_cholesky() {
        let a = laplacian(50);
        let b = vec![1.0; 50];
        let direct = BandCholesky::new(&a).unwrap().solve(&b);
        let cg = conjugate_gradient(&a, &b, 1e-13, 500).unwrap();
        for (u, v) in direct.iter().zip(&cg.x) {
            assert!((u - v).abs() < 1e-8);
        }
        assert!(conjugate_gradient(&a, &b, 1e-13, 2).is_err());
    }

    #[test]
    fn coordinate_export_is_sorted_and_full() {
        let text = laplacian(2).to_coordinate_text();
        let rows: Vec<(usize, usize)> = text
            .lines()
            .map(|l| {
                let mut it = l.split_whitespace();
                (it.next().unwrap().parse().unwrap(), it.next().unwrap().parse().unwrap())
            })
            .collect();
        assert_eq!(rows, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
    }

    #[test]
    fn generalized_eigenvalues_of_scaled_pencil() {
        let a = laplacian(6).to_dense();
        let b = a.clone() * 0.5;
        let ev = generalized_eigenvalues(&a, &b).unwrap();
        assert!(ev.iter().all(|l| (l - 2.0).abs() < 1e-10));
    }
}
