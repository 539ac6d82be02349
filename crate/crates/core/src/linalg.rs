//! Sparse storage, envelope Cholesky and preconditioned conjugate gradients.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sum::{dot, pairwise_sum_by};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Square `n × n` matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_by_key(|a| (a.0, a.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                let top = vals.len() - 1;
                vals[top] = vals[top] + v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `(col, value)` entries of one row, sorted by column.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.row(r).find(|&(k, _)| k == c).map(|(_, v)| v).unwrap_or_else(T::zero)
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let row = |r: usize| {
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            let (c, v) = (&self.cols[span.clone()], &self.vals[span]);
            pairwise_sum_by(c.len(), |k| v[k] * x[c[k]])
        };
        if self.n >= 4096 {
            (0..self.n).into_par_iter().map(row).collect()
        } else {
            (0..self.n).map(row).collect()
        }
    }

    /// Principal submatrix on `keep` (in the given order).
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            pos[old] = new;
        }
        let mut triplets = Vec::new();
        for (new_r, &old_r) in keep.iter().enumerate() {
            for (c, v) in self.row(old_r) {
                if pos[c] != usize::MAX {
                    triplets.push((new_r, pos[c], v));
                }
            }
        }
        Self::from_triplets(keep.len(), triplets)
    }
}

/// Cholesky factor `A = L Lᵀ` stored by rows over each row's envelope.
#[derive(Debug, Clone)]
pub struct SkylineCholesky<T> {
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<T>,
}

impl<T: Real> SkylineCholesky<T> {
    /// Factors a symmetric positive definite sparse matrix.
    pub fn from_csr(a: &CsrMatrix<T>) -> Result<Self> {
        let n = a.dim();
        let first: Vec<usize> = (0..n).map(|r| a.row(r).map(|(c, _)| c).next().unwrap_or(r).min(r)).collect();
        let mut this = Self::allocate(first);
        for r in 0..n {
            for (c, v) in a.row(r) {
                if c <= r {
                    let at = this.slot(r, c);
                    this.data[at] = v;
                }
            }
        }
        this.factor_in_place()?;
        Ok(this)
    }

    /// Factors a dense symmetric positive definite matrix given row-major.
    pub fn from_dense(n: usize, a: &[T]) -> Result<Self> {
        let first: Vec<usize> = (0..n).map(|r| (0..r).find(|&c| a[r * n + c] != T::zero()).unwrap_or(r)).collect();
        let mut this = Self::allocate(first);
        for r in 0..n {
            for c in this.first[r]..=r {
                let at = this.slot(r, c);
                this.data[at] = a[r * n + c];
            }
        }
        this.factor_in_place()?;
        Ok(this)
    }

    fn allocate(first: Vec<usize>) -> Self {
        let mut start = Vec::with_capacity(first.len() + 1);
        let mut acc = 0;
        for (r, &f) in first.iter().enumerate() {
            start.push(acc);
            acc += r - f + 1;
        }
        start.push(acc);
        Self { first, start, data: vec![T::zero(); acc] }
    }

    #[inline]
    fn slot(&self, r: usize, c: usize) -> usize {
        self.start[r] + (c - self.first[r])
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    /// Stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    fn factor_in_place(&mut self) -> Result<()> {
        let n = self.dim();
        for r in 0..n {
            let fr = self.first[r];
            for c in fr..=r {
                let fc = self.first[c];
                let lo = fr.max(fc);
                let (ro, co) = (self.slot(r, lo), self.slot(c, lo));
                let len = c - lo;
                let mut acc = self.data[self.slot(r, c)];
                // dot of the overlapping envelope parts of rows r and c
                let mut s = T::zero();
                for k in 0..len {
                    s = s + self.data[ro + k] * self.data[co + k];
                }
                acc = acc - s;
                let at = self.slot(r, c);
                if c == r {
                    if !(acc > T::zero()) || !acc.is_finite() {
                        return Err(Error::NotPositiveDefinite { row: r, pivot: acc.to_f64_lossy() });
                    }
                    self.data[at] = acc.sqrt();
                } else {
                    let d = self.data[self.slot(c, c)];
                    self.data[at] = acc / d;
                }
            }
        }
        Ok(())
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut y = b.to_vec();
        for r in 0..n {
            let fr = self.first[r];
            let base = self.start[r];
            let mut s = y[r];
            for c in fr..r {
                s = s - self.data[base + c - fr] * y[c];
            }
            y[r] = s / self.data[self.slot(r, r)];
        }
        for r in (0..n).rev() {
            y[r] = y[r] / self.data[self.slot(r, r)];
            let fr = self.first[r];
            let base = self.start[r];
            let yr = y[r];
            for c in fr..r {
                y[c] = y[c] - self.data[base + c - fr] * yr;
            }
        }
        y
    }
}

/// Outcome of a conjugate-gradient solve.
#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome<T> {
    pub solution: Vec<T>,
    pub iterations: usize,
    /// `‖b − A x‖ / ‖b‖` at exit.
    pub relative_residual: T,
}

/// Preconditioned conjugate gradients for symmetric positive definite `A`.
pub fn pcg<T: Real, P: Fn(&[T]) -> Vec<T>>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: Vec<T>,
    precondition: P,
    tol: T,
    max_iter: usize,
) -> Result<CgOutcome<T>> {
    let b_norm = dot(b, b).sqrt();
    if b_norm == T::zero() {
        return Ok(CgOutcome { solution: vec![T::zero(); b.len()], iterations: 0, relative_residual: T::zero() });
    }
    let mut x = x0;
    let ax = a.matvec(&x);
    let mut r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut res = dot(&r, &r).sqrt() / b_norm;
    let mut it = 0;
    while res > tol {
        if it >= max_iter {
            return Err(Error::NoConvergence { residual: res.to_f64_lossy() });
        }
        let ap = a.matvec(&p);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::NoConvergence { residual: res.to_f64_lossy() });
        }
        let alpha = rz / pap;
        for k in 0..x.len() {
            x[k] = x[k] + alpha * p[k];
            r[k] = r[k] - alpha * ap[k];
        }
        z = precondition(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..p.len() {
            p[k] = z[k] + beta * p[k];
        }
        res = dot(&r, &r).sqrt() / b_norm;
        it += 1;
    }
    Ok(CgOutcome { solution: x, iterations: it, relative_residual: res })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn laplacian(n: usize) -> CsrMatrix<f64> {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + 1e-3));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn triplets_merge_duplicates() {
        let m = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 0, 2.0), (0, 0, 3.0)]);
        assert_eq!(m.get(0, 0), 4.0);
        assert_eq!(m.get(1, 0), 2.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn skyline_solves_banded_and_dense_systems() {
        let a = laplacian(50);
        let x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.matvec(&x);
        let chol = SkylineCholesky::from_csr(&a).unwrap();
        assert_eq!(chol.envelope_size(), 50 + 49);
        for (u, v) in chol.solve(&b).iter().zip(&x) {
            assert_relative_eq!(u, v, epsilon = 1e-9);
        }
        let n = 6;
        let dense: Vec<f64> = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                1.0 / (1.0 + i as f64 + j as f64) + if i == j { 1.0 } else { 0.0 }
            })
            .collect();
        let chol = SkylineCholesky::from_dense(n, &dense).unwrap();
        let rhs = vec![1.0; n];
        let sol = chol.solve(&rhs);
        for i in 0..n {
            let row: f64 = (0..n).map(|j| dense[i * n + j] * sol[j]).sum();
            assert_relative_eq!(row, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(matches!(SkylineCholesky::from_csr(&a), Err(Error::NotPositiveDefinite { row: 1, .. })));
    }

    #[test]
    fn pcg_converges_and_reports_stalls() {
        let a = laplacian(200);
        let b = vec![1.0; 200];
        let out = pcg(&a, &b, vec![0.0; 200], |r| r.to_vec(), 1e-10, 1000).unwrap();
        assert!(out.relative_residual <= 1e-10);
        let chol = SkylineCholesky::from_csr(&a).unwrap();
        let fast = pcg(&a, &b, vec![0.0; 200], |r| chol.solve(r), 1e-12, 5).unwrap();
        assert!(fast.iterations <= 2);
        assert!(matches!(pcg(&a, &b, vec![0.0; 200], |r| r.to_vec(), 1e-12, 3), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn submatrix_keeps_requested_block() {
        let a = laplacian(5);
        let s = a.submatrix(&[1, 2, 4]);
        assert_eq!(s.get(0, 1), -1.0);
        assert_eq!(s.get(1, 2), 0.0);
        assert_eq!(s.dim(), 3);
    }
}
