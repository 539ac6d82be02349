//! Discrete Hessian energy `∬ |D²u|²` on masked 2-D grids.
//!
//! Every masked node carries three finite-difference stencils for `u_xx`,
//! `u_xy` and `u_yy`, each exact on quadratics. The energy is the nodal
//! quadrature `Σ w_p [(u_xx)² + 2 (u_xy)² + (u_yy)²]` with the grid weights.
//! Stencils are chosen per node from the nodes available inside the mask:
//! centered first, then one-sided, then a centered stencil borrowed from the
//! nearest node where it fits.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField2D};
use crate::linalg::CsrMatrix;
use crate::scalar::Real;
use crate::sum::pairwise_sum;

type Stencil<T> = Vec<(usize, T)>;

const SECOND_CENTERED: [(isize, f64); 3] = [(-1, 1.0), (0, -2.0), (1, 1.0)];
const SECOND_FORWARD: [(isize, f64); 4] = [(0, 2.0), (1, -5.0), (2, 4.0), (3, -1.0)];
const SECOND_BACKWARD: [(isize, f64); 4] = [(0, 2.0), (-1, -5.0), (-2, 4.0), (-3, -1.0)];

const FIRST_CENTERED: [(isize, f64); 2] = [(-1, -0.5), (1, 0.5)];
const FIRST_FORWARD: [(isize, f64); 3] = [(0, -1.5), (1, 2.0), (2, -0.5)];
const FIRST_BACKWARD: [(isize, f64); 3] = [(0, 1.5), (-1, -2.0), (-2, 0.5)];

const SEARCH_RADIUS: isize = 4;

#[derive(Debug, Clone)]
struct NodeStencils<T> {
    weight: T,
    xx: Stencil<T>,
    xy: Stencil<T>,
    yy: Stencil<T>,
}

/// Squared norms of the three second derivatives, `∬ u_xx²`, `∬ u_xy²`, `∬ u_yy²`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct HessianComponents<T> {
    pub xx: T,
    pub xy: T,
    pub yy: T,
}

impl<T: Real> HessianComponents<T> {
    /// Frobenius total `xx + 2·xy + yy`.
    pub fn total(&self) -> T {
        self.xx + T::lit(2.0) * self.xy + self.yy
    }
}

/// Precomputed stencils of the Hessian energy on one grid.
#[derive(Debug, Clone)]
pub struct HessianOperator<T> {
    grid: Arc<Grid2D<T>>,
    nodes: Vec<usize>,
    stencils: Vec<NodeStencils<T>>,
}

impl<T: Real> HessianOperator<T> {
    pub fn new(grid: Arc<Grid2D<T>>) -> Result<Self> {
        let hx2 = grid.hx() * grid.hx();
        let hy2 = grid.hy() * grid.hy();
        let hxy = grid.hx() * grid.hy();
        let mut nodes = Vec::new();
        let mut stencils = Vec::new();
        for idx in 0..grid.node_count() {
            if !grid.mask()[idx] {
                continue;
            }
            let (i, j) = grid.coords(idx);
            let (i, j) = (i as isize, j as isize);
            let xx = second_stencil(&grid, i, j, Axis::X)
                .ok_or_else(|| thin(i, j, "u_xx"))?
                .into_iter()
                .map(|(k, c)| (k, T::lit(c) / hx2))
                .collect();
            let yy = second_stencil(&grid, i, j, Axis::Y)
                .ok_or_else(|| thin(i, j, "u_yy"))?
                .into_iter()
                .map(|(k, c)| (k, T::lit(c) / hy2))
                .collect();
            let xy = mixed_stencil(&grid, i, j)
                .ok_or_else(|| thin(i, j, "u_xy"))?
                .into_iter()
                .map(|(k, c)| (k, T::lit(c) / hxy))
                .collect();
            nodes.push(idx);
            stencils.push(NodeStencils { weight: grid.weights()[idx], xx, xy, yy });
        }
        Ok(Self { grid, nodes, stencils })
    }

    pub fn grid(&self) -> &Arc<Grid2D<T>> {
        &self.grid
    }

    fn per_node<F: Fn(&NodeStencils<T>) -> T + Sync + Send>(&self, f: F) -> T {
        let terms: Vec<T> = if self.stencils.len() >= 4096 {
            self.stencils.par_iter().map(&f).collect()
        } else {
            self.stencils.iter().map(&f).collect()
        };
        pairwise_sum(&terms)
    }

    pub fn components(&self, values: &[T]) -> HessianComponents<T> {
        let sq = |s: &Stencil<T>| {
            let v = apply(s, values);
            v * v
        };
        HessianComponents {
            xx: self.per_node(|st| st.weight * sq(&st.xx)),
            xy: self.per_node(|st| st.weight * sq(&st.xy)),
            yy: self.per_node(|st| st.weight * sq(&st.yy)),
        }
    }

    pub fn energy(&self, values: &[T]) -> T {
        let two = T::lit(2.0);
        self.per_node(|st| {
            let a = apply(&st.xx, values);
            let b = apply(&st.xy, values);
            let c = apply(&st.yy, values);
            st.weight * (a * a + two * b * b + c * c)
        })
    }

    /// `B(u, v)` with `energy(u) = B(u, u)`.
    pub fn bilinear(&self, u: &[T], v: &[T]) -> T {
        let two = T::lit(2.0);
        self.per_node(|st| {
            st.weight
                * (apply(&st.xx, u) * apply(&st.xx, v)
                    + two * apply(&st.xy, u) * apply(&st.xy, v)
                    + apply(&st.yy, u) * apply(&st.yy, v))
        })
    }

    /// Adds `coef · ∇energy(values)` into `grad`.
    pub fn gradient_into(&self, values: &[T], coef: T, grad: &mut [T]) {
        let two = T::lit(2.0);
        for st in &self.stencils {
            let base = two * coef * st.weight;
            for (s, mult) in [(&st.xx, T::one()), (&st.xy, two), (&st.yy, T::one())] {
                let f = base * mult * apply(s, values);
                for &(k, c) in s {
                    grad[k] = grad[k] + f * c;
                }
            }
        }
    }

    /// Sparse symmetric matrix `K` over all lattice nodes with `energy(u) = uᵀ K u`.
    pub fn matrix(&self) -> CsrMatrix<T> {
        let mut triplets = Vec::new();
        let two = T::lit(2.0);
        for st in &self.stencils {
            for (s, mult) in [(&st.xx, T::one()), (&st.xy, two), (&st.yy, T::one())] {
                let f = st.weight * mult;
                for &(a, ca) in s {
                    for &(b, cb) in s {
                        triplets.push((a, b, f * ca * cb));
                    }
                }
            }
        }
        CsrMatrix::from_triplets(self.grid.node_count(), triplets)
    }

    /// Lattice indices of the masked nodes, in row-major order.
    pub fn masked_nodes(&self) -> &[usize] {
        &self.nodes
    }
}

/// `∬ |D²u|²` with the Frobenius norm.
pub fn hessian_energy_2d<T: Real>(u: &ScalarField2D<T>) -> Result<T> {
    Ok(HessianOperator::new(u.grid().clone())?.energy(u.values()))
}

fn thin(i: isize, j: isize, what: &str) -> Error {
    Error::InvalidGrid(format!("no {what} stencil fits in the mask near node ({i}, {j})"))
}

#[inline]
fn apply<T: Real>(s: &Stencil<T>, values: &[T]) -> T {
    s.iter().fold(T::zero(), |acc, &(k, c)| acc + c * values[k])
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

fn fits<T: Real>(grid: &Grid2D<T>, i: isize, j: isize, axis: Axis, taps: &[(isize, f64)]) -> bool {
    taps.iter().all(|&(o, _)| match axis {
        Axis::X => grid.is_masked_signed(i + o, j),
        Axis::Y => grid.is_masked_signed(i, j + o),
    })
}

fn along<T: Real>(grid: &Grid2D<T>, i: isize, j: isize, axis: Axis, taps: &[(isize, f64)]) -> Vec<(usize, f64)> {
    taps.iter()
        .map(|&(o, c)| {
            let (a, b) = match axis {
                Axis::X => (i + o, j),
                Axis::Y => (i, j + o),
            };
            (grid.index(a as usize, b as usize), c)
        })
        .collect()
}

/// Offsets within the search radius ordered by distance, then by row offset.
fn search_order() -> Vec<(isize, isize)> {
    let mut offs = Vec::new();
    for dj in -SEARCH_RADIUS..=SEARCH_RADIUS {
        for di in -SEARCH_RADIUS..=SEARCH_RADIUS {
            if (di, dj) != (0, 0) {
                offs.push((di, dj));
            }
        }
    }
    offs.sort_by_key(|&(di, dj)| (di * di + dj * dj, dj.abs(), dj, di));
    offs
}

fn second_stencil<T: Real>(grid: &Grid2D<T>, i: isize, j: isize, axis: Axis) -> Option<Vec<(usize, f64)>> {
    for taps in [&SECOND_CENTERED[..], &SECOND_FORWARD[..], &SECOND_BACKWARD[..]] {
        if fits(grid, i, j, axis, taps) {
            return Some(along(grid, i, j, axis, taps));
        }
    }
    search_order()
        .into_iter()
        .map(|(di, dj)| (i + di, j + dj))
        .find(|&(a, b)| fits(grid, a, b, axis, &SECOND_CENTERED))
        .map(|(a, b)| along(grid, a, b, axis, &SECOND_CENTERED))
}

fn product<T: Real>(
    grid: &Grid2D<T>,
    i: isize,
    j: isize,
    tx: &[(isize, f64)],
    ty: &[(isize, f64)],
) -> Option<Vec<(usize, f64)>> {
    let mut out = Vec::with_capacity(tx.len() * ty.len());
    for &(oy, cy) in ty {
        for &(ox, cx) in tx {
            if !grid.is_masked_signed(i + ox, j + oy) {
                return None;
            }
            out.push((grid.index((i + ox) as usize, (j + oy) as usize), cx * cy));
        }
    }
    Some(out)
}

fn mixed_stencil<T: Real>(grid: &Grid2D<T>, i: isize, j: isize) -> Option<Vec<(usize, f64)>> {
    let c = &FIRST_CENTERED[..];
    let f = &FIRST_FORWARD[..];
    let b = &FIRST_BACKWARD[..];
    let order = [(c, c), (c, f), (c, b), (f, c), (b, c), (f, f), (f, b), (b, f), (b, b)];
    for (tx, ty) in order {
        if let Some(s) = product(grid, i, j, tx, ty) {
            return Some(s);
        }
    }
    search_order().into_iter().find_map(|(di, dj)| product(grid, i + di, j + dj, c, c))
}
