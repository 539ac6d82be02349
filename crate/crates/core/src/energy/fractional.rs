//! Fractional seminorms on uniform 1-D grids.
//!
//! The `H^{1/2}` double integral `∬ |c(x) − c(y)|² / |x − y|²` is discretized by
//! the midpoint rule on the `n × n` cell squares. Off-diagonal squares use the
//! cell-midpoint samples directly; on a diagonal square the integrand tends to
//! `|c′|²`, so those squares contribute `h² · |c′(m_k)|²`. Because the kernel
//! only depends on the lag `k − l`, the off-diagonal part is accumulated lag by
//! lag, which keeps the reduction order fixed and parallelizes over lags.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::ScalarField1D;
use crate::scalar::Real;
use crate::sum::{pairwise_sum, pairwise_sum_by};

const PAR_THRESHOLD: usize = 512;

/// How nodal values are turned into cell samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellMap {
    /// Cell means of the field itself; slopes are node differences.
    Average,
    /// Node differences, i.e. samples of the derivative; slopes are centered
    /// differences of those samples (one-sided second order at the end cells).
    Derivative,
}

impl CellMap {
    /// Cell values and cell slopes of a nodal vector.
    pub fn apply<T: Real>(self, f: &[T], h: T) -> (Vec<T>, Vec<T>) {
        let n = f.len() - 1;
        match self {
            CellMap::Average => {
                let half = T::lit(0.5);
                let c = (0..n).map(|k| half * (f[k] + f[k + 1])).collect();
                let s = (0..n).map(|k| (f[k + 1] - f[k]) / h).collect();
                (c, s)
            }
            CellMap::Derivative => {
                let c: Vec<T> = (0..n).map(|k| (f[k + 1] - f[k]) / h).collect();
                let s = (0..n)
                    .map(|k| slope_stencil(k, n).iter().fold(T::zero(), |a, &(l, w)| a + T::lit(w) * c[l]) / (h + h))
                    .collect();
                (c, s)
            }
        }
    }

    /// Accumulates `Pᵀ [gc; gs]` into `out`, where `P` is [`Self::apply`].
    pub fn transpose_into<T: Real>(self, gc: &[T], gs: &[T], h: T, out: &mut [T]) {
        let n = gc.len();
        match self {
            CellMap::Average => {
                let half = T::lit(0.5);
                for k in 0..n {
                    out[k] = out[k] + half * gc[k] - gs[k] / h;
                    out[k + 1] = out[k + 1] + half * gc[k] + gs[k] / h;
                }
            }
            CellMap::Derivative => {
                let mut gcell = gc.to_vec();
                for k in 0..n {
                    let scale = gs[k] / (h + h);
                    for (l, w) in slope_stencil(k, n) {
                        gcell[l] = gcell[l] + T::lit(w) * scale;
                    }
                }
                for k in 0..n {
                    out[k] = out[k] - gcell[k] / h;
                    out[k + 1] = out[k + 1] + gcell[k] / h;
                }
            }
        }
    }

    /// Dense matrices of the two halves of [`Self::apply`]: `(values, slopes)`, each `n × (n+1)`.
    fn matrices<T: Real>(self, n: usize, h: T) -> (Vec<Vec<(usize, T)>>, Vec<Vec<(usize, T)>>) {
        let mut pc = vec![Vec::new(); n];
        let mut ps = vec![Vec::new(); n];
        match self {
            CellMap::Average => {
                for k in 0..n {
                    pc[k] = vec![(k, T::lit(0.5)), (k + 1, T::lit(0.5))];
                    ps[k] = vec![(k, -T::one() / h), (k + 1, T::one() / h)];
                }
            }
            CellMap::Derivative => {
                for k in 0..n {
                    pc[k] = vec![(k, -T::one() / h), (k + 1, T::one() / h)];
                    let mut row: Vec<(usize, T)> = Vec::new();
                    for (l, w) in slope_stencil(k, n) {
                        let c = T::lit(w) / (h + h) / h;
                        row.push((l, -c));
                        row.push((l + 1, c));
                    }
                    ps[k] = row;
                }
            }
        }
        (pc, ps)
    }
}

/// Stencil (cell, weight·2h) of the slope of cell samples at cell `k` of `n`.
fn slope_stencil(k: usize, n: usize) -> [(usize, f64); 3] {
    if k == 0 {
        [(0, -3.0), (1, 4.0), (2, -1.0)]
    } else if k == n - 1 {
        [(n - 1, 3.0), (n - 2, -4.0), (n - 3, 1.0)]
    } else {
        [(k - 1, -1.0), (k + 1, 1.0), (k, 0.0)]
    }
}

/// `Σ_{j ≥ m} 1/j²` for `m ≥ 1`.
pub(crate) fn inverse_square_tail(m: usize) -> f64 {
    const SWITCH: usize = 24;
    let mut acc = 0.0;
    let mut j = m;
    while j < SWITCH {
        acc += 1.0 / (j * j) as f64;
        j += 1;
    }
    let x = j as f64;
    let x2 = x * x;
    acc + 1.0 / x + 1.0 / (2.0 * x2) + 1.0 / (6.0 * x2 * x) - 1.0 / (30.0 * x2 * x2 * x)
        + 1.0 / (42.0 * x2 * x2 * x2 * x)
        - 1.0 / (30.0 * x2 * x2 * x2 * x2 * x)
}

/// Weight on `c_k²` of the pairs between cell `k` and the infinite extension
/// of the cell lattice on both sides, where the samples vanish.
pub(crate) fn tail_weights<T: Real>(n: usize) -> Vec<T> {
    (0..n).map(|k| T::lit(2.0 * (inverse_square_tail(n - k) + inverse_square_tail(k + 1)))).collect()
}

/// The `H^{1/2}` quadratic form on cell samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct H12Form {
    pub map: CellMap,
    /// Add the exact contribution of an infinite zero extension of the samples.
    pub full_line: bool,
}

impl H12Form {
    pub fn value<T: Real>(&self, f: &[T], h: T) -> T {
        let (c, s) = self.map.apply(f, h);
        let mut total = off_diagonal(&c) + h * h * pairwise_sum_by(s.len(), |k| s[k] * s[k]);
        if self.full_line {
            let tw = tail_weights::<T>(c.len());
            total = total + pairwise_sum_by(c.len(), |k| tw[k] * c[k] * c[k]);
        }
        total
    }

    /// Symmetric bilinear form `B(f, e)` with `value(f) = B(f, f)`.
    pub fn bilinear<T: Real>(&self, f: &[T], e: &[T], h: T) -> T {
        let (c, s) = self.map.apply(f, h);
        let (d, t) = self.map.apply(e, h);
        let mut total = off_diagonal_bilinear(&c, &d) + h * h * pairwise_sum_by(s.len(), |k| s[k] * t[k]);
        if self.full_line {
            let tw = tail_weights::<T>(c.len());
            total = total + pairwise_sum_by(c.len(), |k| tw[k] * c[k] * d[k]);
        }
        total
    }

    /// Adds `coef · ∇value(f)` into `grad`.
    pub fn gradient_into<T: Real>(&self, f: &[T], h: T, coef: T, grad: &mut [T]) {
        let (c, s) = self.map.apply(f, h);
        let n = c.len();
        let mut gc = off_diagonal_gradient(&c);
        if self.full_line {
            let tw = tail_weights::<T>(n);
            for k in 0..n {
                gc[k] = gc[k] + T::lit(2.0) * tw[k] * c[k];
            }
        }
        let two_h2 = T::lit(2.0) * h * h;
        let gs: Vec<T> = s.iter().map(|&v| coef * two_h2 * v).collect();
        for v in gc.iter_mut() {
            *v = *v * coef;
        }
        self.map.transpose_into(&gc, &gs, h, grad);
    }

    /// Dense Hessian with respect to the nodal values, row-major `(n+1)²`.
    pub fn hessian<T: Real>(&self, nodes: usize, h: T) -> Vec<T> {
        let n = nodes - 1;
        // Hessian in cell values: 4 (diag(rowsum K) − K_off) [+ 4 diag(tail)]
        let mut hc = vec![T::zero(); n * n];
        let rowsum = |k: usize| -> T {
            T::lit(inverse_square_tail(1) * 2.0 - inverse_square_tail(k + 1) - inverse_square_tail(n - k))
        };
        for k in 0..n {
            for l in 0..n {
                hc[k * n + l] = if k == l {
                    T::lit(4.0) * rowsum(k)
                } else {
                    let d = k.abs_diff(l) as f64;
                    T::lit(-4.0 / (d * d))
                };
            }
        }
        if self.full_line {
            let tw = tail_weights::<T>(n);
            for k in 0..n {
                hc[k * n + k] = hc[k * n + k] + T::lit(2.0) * tw[k];
            }
        }
        let (pc, ps) = self.map.matrices::<T>(n, h);
        // X = Hc · Pc  (n × nodes)
        let mut x = vec![T::zero(); n * nodes];
        for k in 0..n {
            for (l, row) in pc.iter().enumerate() {
                let hkl = hc[k * n + l];
                for &(j, p) in row {
                    x[k * nodes + j] = x[k * nodes + j] + hkl * p;
                }
            }
        }
        let mut out = vec![T::zero(); nodes * nodes];
        for (k, row) in pc.iter().enumerate() {
            for &(i, p) in row {
                for j in 0..nodes {
                    out[i * nodes + j] = out[i * nodes + j] + p * x[k * nodes + j];
                }
            }
        }
        let two_h2 = T::lit(2.0) * h * h;
        for row in &ps {
            for &(i, a) in row {
                for &(j, b) in row {
                    out[i * nodes + j] = out[i * nodes + j] + two_h2 * a * b;
                }
            }
        }
        out
    }
}

fn lag_sum<T: Real>(c: &[T], d: usize) -> T {
    let n = c.len();
    pairwise_sum_by(n - d, |k| {
        let diff = c[k + d] - c[k];
        diff * diff
    })
}

/// `Σ_{k≠l} (c_k − c_l)² / (k − l)²`.
pub(crate) fn off_diagonal<T: Real>(c: &[T]) -> T {
    let n = c.len();
    if n < 2 {
        return T::zero();
    }
    let per_lag = |d: usize| -> T {
        let df = T::of(d);
        lag_sum(c, d) / (df * df)
    };
    let lags: Vec<T> =
        if n >= PAR_THRESHOLD { (1..n).into_par_iter().map(per_lag).collect() } else { (1..n).map(per_lag).collect() };
    T::lit(2.0) * pairwise_sum(&lags)
}

fn off_diagonal_bilinear<T: Real>(c: &[T], e: &[T]) -> T {
    let n = c.len();
    if n < 2 {
        return T::zero();
    }
    let per_lag = |d: usize| -> T {
        let df = T::of(d);
        pairwise_sum_by(n - d, |k| (c[k + d] - c[k]) * (e[k + d] - e[k])) / (df * df)
    };
    let lags: Vec<T> =
        if n >= PAR_THRESHOLD { (1..n).into_par_iter().map(per_lag).collect() } else { (1..n).map(per_lag).collect() };
    T::lit(2.0) * pairwise_sum(&lags)
}

/// Gradient of [`off_diagonal`] with respect to the cell samples.
fn off_diagonal_gradient<T: Real>(c: &[T]) -> Vec<T> {
    let n = c.len();
    let per_cell = |k: usize| -> T {
        let s = pairwise_sum_by(n, |l| {
            if l == k {
                T::zero()
            } else {
                let d = T::of(k.abs_diff(l));
                (c[k] - c[l]) / (d * d)
            }
        });
        T::lit(4.0) * s
    };
    if n >= PAR_THRESHOLD {
        (0..n).into_par_iter().map(per_cell).collect()
    } else {
        (0..n).map(per_cell).collect()
    }
}

/// `|g|²_{H^{1/2}}` over the grid interval.
pub fn h12_seminorm<T: Real>(g: &ScalarField1D<T>) -> T {
    H12Form { map: CellMap::Average, full_line: false }.value(g.values(), g.grid().h())
}

/// `|f′|²_{H^{1/2}}` over the grid interval, with `f′` sampled by node differences.
pub fn h12_seminorm_of_derivative<T: Real>(f: &ScalarField1D<T>) -> T {
    H12Form { map: CellMap::Derivative, full_line: false }.value(f.values(), f.grid().h())
}

/// `|f′|²_{H^{1/2}(ℝ)}` for a profile that is constant outside its grid.
///
/// The pairs with one point outside the interval are summed exactly on the
/// infinite continuation of the cell lattice. Fails when the profile is not
/// flat in the two end cells (relative to the largest cell derivative).
pub fn h12_seminorm_fullline<T: Real>(f: &ScalarField1D<T>) -> Result<T> {
    let h = f.grid().h();
    let (c, _) = CellMap::Derivative.apply(f.values(), h);
    let peak = crate::sum::max_abs(&c);
    let n = c.len();
    let tol = T::lit(1e-8) * peak;
    for &k in &[0, 1, n - 2, n - 1] {
        if c[k].abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "profile is not flat at the grid ends (|f′| = {} in cell {k})",
                c[k].abs()
            )));
        }
    }
    Ok(H12Form { map: CellMap::Derivative, full_line: true }.value(f.values(), h))
}

/// Second-difference `H^{3/2}` seminorm `∬ |u(x) − 2u((x+y)/2) + u(y)|² / |x − y|⁴`.
///
/// Changing variables to midpoint and half-lag puts the integrand on the node
/// lattice when `n` is even. The lattice points fill a diamond; interior points
/// weigh 1, edge points 1/2 and the four vertices 1/4, which integrates
/// constants exactly. On the zero-lag line the integrand is replaced by its
/// limit `|u″|² / 16`.
pub fn h32_seminorm<T: Real>(u: &ScalarField1D<T>) -> Result<T> {
    let n = u.grid().cells();
    if n % 2 == 1 {
        return Err(Error::InvalidArgument(format!("h32 seminorm needs an even cell count, got {n}")));
    }
    let h = u.grid().h();
    let v = u.values();
    let d2 = super::local::second_derivative(v, h);
    let per_mid = |i: usize| -> T {
        let reach = i.min(n - i);
        let vertex_mid = i == 0 || i == n;
        // zero lag
        let w0 = if vertex_mid { T::lit(0.25) } else { T::one() };
        let zero = w0 * h * h * d2[i] * d2[i] / T::lit(8.0);
        let lagged = pairwise_sum_by(reach, |q| {
            let k = q + 1;
            let w = if k == reach {
                if 2 * i == n {
                    T::lit(0.25)
                } else {
                    T::lit(0.5)
                }
            } else {
                T::one()
            };
            let sd = v[i - k] - T::lit(2.0) * v[i] + v[i + k];
            let kf = T::of(k);
            let k4 = kf * kf * kf * kf;
            w * sd * sd / (T::lit(8.0) * k4 * h * h)
        });
        zero + T::lit(2.0) * lagged
    };
    let rows: Vec<T> = if n >= PAR_THRESHOLD {
        (0..=n).into_par_iter().map(per_mid).collect()
    } else {
        (0..=n).map(per_mid).collect()
    };
    Ok(pairwise_sum(&rows))
}
