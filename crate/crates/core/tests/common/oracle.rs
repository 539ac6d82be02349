//! Dense reference implementations of the discrete energies.
//!
//! These work on plain slices with straightforward loops: derivatives come
//! from Lagrange interpolation on the stencil nodes, double integrals are
//! summed pair by pair in ordinary floating point, and the infinite lattice
//! tails use `ζ(2) = π²/6`.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Coefficients of `∏ (t − r)` in increasing degree.
fn poly_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut p = vec![1.0];
    for &r in roots {
        let mut q = vec![0.0; p.len() + 1];
        for (k, &c) in p.iter().enumerate() {
            q[k + 1] += c;
            q[k] -= r * c;
        }
        p = q;
    }
    p
}

/// `d`-th derivative at `x` of the polynomial interpolating `(xs, ys)`.
pub fn lagrange_derivative(xs: &[f64], ys: &[f64], x: f64, d: usize) -> f64 {
    let mut total = 0.0;
    for j in 0..xs.len() {
        let others: Vec<f64> = xs.iter().enumerate().filter(|&(m, _)| m != j).map(|(_, &v)| v).collect();
        let denom: f64 = others.iter().map(|&r| xs[j] - r).product();
        let mut p = poly_from_roots(&others);
        for _ in 0..d {
            p = p.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect();
        }
        let val = p.iter().rev().fold(0.0, |acc, &c| acc * x + c);
        total += ys[j] * val / denom;
    }
    total
}

fn window(i: usize, n: usize, width: usize) -> Vec<usize> {
    let half = width / 2;
    let start = if i < half {
        0
    } else if i + (width - 1 - half) > n {
        n + 1 - width
    } else {
        i - half
    };
    (start..start + width).collect()
}

/// Second derivative at node `i`: the parabola through three centered nodes,
/// or the cubic through the four nodes at an end.
pub fn second_derivative_at(v: &[f64], h: f64, i: usize) -> f64 {
    let n = v.len() - 1;
    let idx = if i == 0 || i == n { window(i, n, 4) } else { window(i, n, 3) };
    let xs: Vec<f64> = idx.iter().map(|&k| k as f64 * h).collect();
    let ys: Vec<f64> = idx.iter().map(|&k| v[k]).collect();
    lagrange_derivative(&xs, &ys, i as f64 * h, 2)
}

/// First derivative at index `i` of samples `v` spaced by `h`: the parabola
/// through three nodes, centered where possible.
pub fn first_derivative_at(v: &[f64], h: f64, i: usize) -> f64 {
    let n = v.len() - 1;
    let idx = window(i, n, 3);
    let xs: Vec<f64> = idx.iter().map(|&k| k as f64 * h).collect();
    let ys: Vec<f64> = idx.iter().map(|&k| v[k]).collect();
    lagrange_derivative(&xs, &ys, i as f64 * h, 1)
}

pub fn trapezoid(n: usize, h: f64) -> Vec<f64> {
    (0..=n).map(|i| if i == 0 || i == n { h / 2.0 } else { h }).collect()
}

pub fn bending(v: &[f64], h: f64) -> f64 {
    let w = trapezoid(v.len() - 1, h);
    (0..v.len()).map(|i| w[i] * second_derivative_at(v, h, i).powi(2)).sum()
}

pub fn potential(v: &[f64], h: f64, w: impl Fn(f64) -> f64) -> f64 {
    let t = trapezoid(v.len() - 1, h);
    v.iter().zip(&t).map(|(&x, &q)| q * w(x)).sum()
}

/// Midpoint rule of `∬ |c(x) − c(y)|²/|x − y|²` over cell squares with the
/// diagonal squares replaced by `h² |c′|²`.
fn h12_cells(c: &[f64], slopes: &[f64], h: f64) -> f64 {
    let n = c.len();
    let mut total = 0.0;
    for k in 0..n {
        for l in 0..n {
            if k == l {
                total += h * h * slopes[k] * slopes[k];
            } else {
                let (xk, xl) = ((k as f64 + 0.5) * h, (l as f64 + 0.5) * h);
                total += h * h * (c[k] - c[l]).powi(2) / (xk - xl).powi(2);
            }
        }
    }
    total
}

/// `|g|²_{H^{1/2}}` with cell means as samples.
pub fn h12(v: &[f64], h: f64) -> f64 {
    let n = v.len() - 1;
    let c: Vec<f64> = (0..n).map(|k| 0.5 * (v[k] + v[k + 1])).collect();
    let s: Vec<f64> = (0..n).map(|k| (v[k + 1] - v[k]) / h).collect();
    h12_cells(&c, &s, h)
}

fn derivative_cells(v: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = v.len() - 1;
    let c: Vec<f64> = (0..n).map(|k| (v[k + 1] - v[k]) / h).collect();
    let s: Vec<f64> = (0..n).map(|k| first_derivative_at(&c, h, k)).collect();
    (c, s)
}

/// `|f′|²_{H^{1/2}}` with cell difference quotients as samples.
pub fn h12_of_derivative(v: &[f64], h: f64) -> f64 {
    let (c, s) = derivative_cells(v, h);
    h12_cells(&c, &s, h)
}

/// `Σ_{j ≥ m} 1/j²` through `ζ(2)`.
pub fn inverse_square_tail(m: usize) -> f64 {
    PI * PI / 6.0 - (1..m).map(|j| 1.0 / (j * j) as f64).sum::<f64>()
}

/// Full-line version of [`h12_of_derivative`]: the derivative samples vanish
/// on every cell of the infinite lattice outside the grid.
pub fn h12_fullline(v: &[f64], h: f64) -> f64 {
    let (c, s) = derivative_cells(v, h);
    let n = c.len();
    let tails: f64 =
        (0..n).map(|k| 2.0 * c[k] * c[k] * (inverse_square_tail(k + 1) + inverse_square_tail(n - k))).sum();
    h12_cells(&c, &s, h) + tails
}

/// `∬ |u(x) − 2u((x+y)/2) + u(y)|²/|x − y|⁴` summed over node pairs whose
/// midpoint is a node; each pair stands for an area `2h²`, nodes on the edges
/// of the square weigh 1/2 per edge, and the diagonal uses the limit `|u″|²/16`.
pub fn h32(v: &[f64], h: f64) -> f64 {
    let n = v.len() - 1;
    let edge = |a: usize| if a == 0 || a == n { 0.5 } else { 1.0 };
    let mut total = 0.0;
    for a in 0..=n {
        for b in 0..=n {
            if (a + b) % 2 == 1 {
                continue;
            }
            let w = edge(a) * edge(b) * 2.0 * h * h;
            let integrand = if a == b {
                second_derivative_at(v, h, a).powi(2) / 16.0
            } else {
                let m = (a + b) / 2;
                let sd = v[a] - 2.0 * v[m] + v[b];
                sd * sd / ((a as f64 - b as f64) * h).powi(4)
            };
            total += w * integrand;
        }
    }
    total
}

/// `(∬u_xx², ∬u_xy², ∬u_yy²)` on an `nx × ny` rectangle stored row by row
/// (`x` fastest), with tensor trapezoid weights.
pub fn hessian_rectangle(u: &[f64], nx: usize, ny: usize, hx: f64, hy: f64) -> (f64, f64, f64) {
    let at = |i: usize, j: usize| u[j * (nx + 1) + i];
    let row = |j: usize| (0..=nx).map(|i| at(i, j)).collect::<Vec<_>>();
    let col = |i: usize| (0..=ny).map(|j| at(i, j)).collect::<Vec<_>>();
    let wx = trapezoid(nx, hx);
    let wy = trapezoid(ny, hy);
    let dx: Vec<Vec<f64>> = (0..=ny).map(|j| (0..=nx).map(|i| first_derivative_at(&row(j), hx, i)).collect()).collect();
    let (mut xx, mut xy, mut yy) = (0.0, 0.0, 0.0);
    for j in 0..=ny {
        for i in 0..=nx {
            let w = wx[i] * wy[j];
            xx += w * second_derivative_at(&row(j), hx, i).powi(2);
            yy += w * second_derivative_at(&col(i), hy, j).powi(2);
            let column_of_dx: Vec<f64> = (0..=ny).map(|jj| dx[jj][i]).collect();
            xy += w * first_derivative_at(&column_of_dx, hy, j).powi(2);
        }
    }
    (xx, xy, yy)
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
