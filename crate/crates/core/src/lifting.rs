//! Trace lifting on the triangle `T_R^+ = {0 < y < R/2, y < x < R − y}`.
//!
//! A trace `g` on `(0, R)` is lifted to the triangle either by the explicit
//! averaging extension `u(x, y) = (1/2y) ∫_{x−y}^{x+y} g` or by minimizing the
//! Hessian energy with the bottom trace frozen. Both are compared with
//! `|g′|²_{H^{1/2}(0,R)}`; the optimal ratio `ζ_{R,g}` lies in `[1/8, 7/16]`.
//!
//! The module also carries two standalone inequality checks used by the
//! property suites: a one-sided Hardy inequality and the comparison
//! `|u|²_{H^{3/2}} ≤ (1/8) |u′|²_{H^{1/2}}`.

use std::sync::Arc;

use serde::Serialize;

use crate::energy::{h12_seminorm_of_derivative, h32_seminorm, HessianComponents, HessianOperator};
use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField1D, ScalarField2D, Shape};
use crate::linalg::{pcg, CsrMatrix, SkylineCholesky};
use crate::scalar::Real;

/// How the lifted field of a [`LiftReport`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LiftMethod {
    ExplicitAverage,
    QuadraticMinimum,
}

/// Hessian energy of a lift against the fractional seminorm of its trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiftReport<T> {
    /// `∬ |D²u|²`.
    pub numerator: T,
    /// `|g′|²_{H^{1/2}}`.
    pub denominator: T,
    pub ratio: T,
    pub method: LiftMethod,
    pub components: HessianComponents<T>,
    /// Linear-solver iterations (zero for the explicit extension).
    pub iterations: usize,
    pub relative_residual: T,
    #[serde(skip)]
    pub field: Option<ScalarField2D<T>>,
}

impl<T: Real> LiftReport<T> {
    /// The three terms of the Hessian energy relative to the denominator, in
    /// the order `(u_xx, u_xy, u_yy)`; the mixed term is counted once.
    pub fn component_ratios(&self) -> (T, T, T) {
        let d = self.denominator;
        (self.components.xx / d, self.components.xy / d, self.components.yy / d)
    }

    /// Whether the per-derivative bounds `1/4`, `1/16`, `1/16` hold up to `tol`.
    pub fn per_derivative_bounds_hold(&self, tol: T) -> bool {
        let (xx, xy, yy) = self.component_ratios();
        let sixteenth = T::lit(1.0 / 16.0);
        xx <= T::lit(0.25) + tol && xy <= sixteenth + tol && yy <= sixteenth + tol
    }
}

fn trace_matches<T: Real>(g: &ScalarField1D<T>, grid: &Grid2D<T>) -> Result<()> {
    let radius = match grid.shape() {
        Shape::TriangleTPlus { radius } | Shape::Diamond { radius } => radius,
        Shape::Rectangle { .. } => {
            return Err(Error::InvalidGrid("the averaging extension lives on the triangle or the diamond".into()))
        }
    };
    let gg = g.grid();
    let len_ok = (gg.length() - radius).abs() <= T::lit(1e-12) * radius;
    if gg.cells() != grid.nx() || !len_ok {
        return Err(Error::InvalidGrid(format!(
            "trace has {} cells on length {}, grid has {} cells on length {}",
            gg.cells(),
            gg.length(),
            grid.nx(),
            radius
        )));
    }
    Ok(())
}

/// Averaging extension of `g` onto a triangle or diamond grid whose base
/// shares `g`'s nodes. On the diamond the window half-width is `|y|`, so the
/// field is even in `y`.
pub fn average_extension<T: Real>(g: &ScalarField1D<T>, grid: Arc<Grid2D<T>>) -> Result<ScalarField2D<T>> {
    trace_matches(g, &grid)?;
    let centre = match grid.shape() {
        Shape::Diamond { .. } => grid.ny() / 2,
        _ => 0,
    };
    let anti = g.antiderivative();
    let h = g.grid().h();
    let mut values = vec![T::zero(); grid.node_count()];
    for (idx, v) in values.iter_mut().enumerate() {
        if !grid.mask()[idx] {
            continue;
        }
        let (i, j) = grid.coords(idx);
        let k = j.abs_diff(centre);
        *v = if k == 0 {
            g.values()[i]
        } else {
            (anti.at_node(i + k) - anti.at_node(i - k)) / (T::lit(2.0) * T::of(k) * h)
        };
    }
    ScalarField2D::new(grid, values)
}

fn trace_seminorm<T: Real>(g: &ScalarField1D<T>) -> Result<T> {
    let d = h12_seminorm_of_derivative(g);
    if !(d > T::lit(1e-12)) {
        return Err(Error::DegenerateTrace);
    }
    Ok(d)
}

/// Ratio for the explicit averaging extension on the matching triangle.
pub fn lifting_ratio_explicit<T: Real>(g: &ScalarField1D<T>) -> Result<LiftReport<T>> {
    let denominator = trace_seminorm(g)?;
    let grid = Arc::new(Grid2D::triangle(g.grid().length(), g.grid().cells())?);
    let op = HessianOperator::new(grid.clone())?;
    let u = average_extension(g, grid)?;
    let components = op.components(u.values());
    let numerator = components.total();
    Ok(LiftReport {
        numerator,
        denominator,
        ratio: numerator / denominator,
        method: LiftMethod::ExplicitAverage,
        components,
        iterations: 0,
        relative_residual: T::zero(),
        field: Some(u),
    })
}

/// Factored Hessian system on one triangle, reusable across traces.
///
/// The unknowns are the masked nodes off the bottom row, except the apex:
/// adding `c·y` to a field leaves the energy unchanged and keeps the trace,
/// so fixing one value off the base loses nothing.
pub struct ZetaSolver<T> {
    grid: Arc<Grid2D<T>>,
    op: HessianOperator<T>,
    full: CsrMatrix<T>,
    reduced: CsrMatrix<T>,
    free: Vec<usize>,
    apex: usize,
    factor: SkylineCholesky<T>,
}

impl<T: Real> ZetaSolver<T> {
    pub fn new(grid: Arc<Grid2D<T>>) -> Result<Self> {
        if !matches!(grid.shape(), Shape::TriangleTPlus { .. }) {
            return Err(Error::InvalidGrid("ζ is estimated on the triangle".into()));
        }
        let op = HessianOperator::new(grid.clone())?;
        let full = op.matrix();
        let half = grid.ny();
        let apex = grid.index(half, half);
        let mut free: Vec<usize> =
            (0..grid.node_count()).filter(|&k| grid.mask()[k] && grid.coords(k).1 > 0 && k != apex).collect();
        free.sort_by_key(|&k| {
            let (i, j) = grid.coords(k);
            (i, j)
        });
        let reduced = full.submatrix(&free);
        let factor = SkylineCholesky::from_csr(&reduced)?;
        Ok(Self { grid, op, full, reduced, free, apex, factor })
    }

    pub fn grid(&self) -> &Arc<Grid2D<T>> {
        &self.grid
    }

    pub fn unknowns(&self) -> usize {
        self.free.len()
    }

    /// Minimizes the Hessian energy with the bottom trace frozen to `g`,
    /// iterating to relative residual `tol` with the factorization as
    /// preconditioner.
    pub fn solve(&self, g: &ScalarField1D<T>, tol: T) -> Result<LiftReport<T>> {
        trace_matches(g, &self.grid)?;
        let denominator = trace_seminorm(g)?;
        let explicit = average_extension(g, self.grid.clone())?;
        let mut fixed = vec![T::zero(); self.grid.node_count()];
        for i in 0..=self.grid.nx() {
            fixed[self.grid.index(i, 0)] = g.values()[i];
        }
        fixed[self.apex] = explicit.values()[self.apex];
        let coupling = self.full.matvec(&fixed);
        let rhs: Vec<T> = self.free.iter().map(|&k| -coupling[k]).collect();
        let x0 = self.factor.solve(&rhs);
        let cap = (50.0 * (self.free.len() as f64).sqrt()).ceil() as usize;
        let out = pcg(&self.reduced, &rhs, x0, |r| self.factor.solve(r), tol, cap)?;
        let mut values = fixed;
        for (slot, &k) in self.free.iter().enumerate() {
            values[k] = out.solution[slot];
        }
        let components = self.op.components(&values);
        let numerator = components.total();
        Ok(LiftReport {
            numerator,
            denominator,
            ratio: numerator / denominator,
            method: LiftMethod::QuadraticMinimum,
            components,
            iterations: out.iterations,
            relative_residual: out.relative_residual,
            field: Some(ScalarField2D::new(self.grid.clone(), values)?),
        })
    }
}

/// One-shot [`ZetaSolver`] solve.
pub fn estimate_zeta<T: Real>(g: &ScalarField1D<T>, grid: Arc<Grid2D<T>>, tol: T) -> Result<LiftReport<T>> {
    ZetaSolver::new(grid)?.solve(g, tol)
}

/// Outcome of an inequality check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub pass: bool,
}

/// `∫_{t0}^{t1} t^q dt` for `0 ≤ t0 < t1`; `+∞` when divergent at `0`.
fn monomial<T: Real>(q: T, t0: T, t1: T) -> T {
    let p = q + T::one();
    if p.abs() < T::lit(1e-12) {
        if t0 == T::zero() {
            return T::infinity();
        }
        return (t1 / t0).ln();
    }
    if t0 == T::zero() && p < T::zero() {
        return T::infinity();
    }
    (t1.powf(p) - t0.powf(p)) / p
}

/// `Σ c_d ∫ t^{q+d}`, skipping exact-zero coefficients so that cancelled
/// singular terms stay finite.
fn weighted<T: Real>(coeffs: &[T], q: T, t0: T, t1: T) -> T {
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != T::zero())
        .fold(T::zero(), |acc, (d, &c)| acc + c * monomial(q + T::of(d), t0, t1))
}

/// Hardy inequality
/// `∫_a^b (x−a)^{−r} ∫_a^x u ≤ (1/(r−1)) ∫_a^b u(x) (x−a)^{1−r}`
/// for the piecewise-linear interpolant of `u`, both sides integrated
/// exactly cell by cell. Either side may be `+∞`.
pub fn hardy_check<T: Real>(u: &ScalarField1D<T>, r: T, slack: T) -> Result<InequalityCheck<T>> {
    if !(r > T::one()) {
        return Err(Error::InvalidArgument(format!("Hardy exponent must exceed 1, got {r}")));
    }
    if let Some(k) = u.values().iter().position(|&v| !(v >= T::zero())) {
        return Err(Error::InvalidArgument(format!("Hardy check needs u ≥ 0 (node {k})")));
    }
    let g = u.grid();
    let h = g.h();
    let v = u.values();
    let half = T::lit(0.5);
    let mut lhs = T::zero();
    let mut rhs = T::zero();
    let mut running = T::zero();
    for k in 0..g.cells() {
        let t0 = T::of(k) * h;
        let t1 = T::of(k + 1) * h;
        let c1 = (v[k + 1] - v[k]) / h;
        let c0 = v[k] - c1 * t0;
        let d = [running - c0 * t0 - c1 * t0 * t0 * half, c0, c1 * half];
        lhs = lhs + weighted(&d, -r, t0, t1);
        rhs = rhs + weighted(&[c0, c1], T::one() - r, t0, t1);
        running = running + (v[k] + v[k + 1]) * half * h;
    }
    rhs = rhs / (r - T::one());
    let pass = lhs <= rhs + slack || (lhs.is_infinite() && rhs.is_infinite());
    Ok(InequalityCheck { lhs, rhs, pass })
}

/// `|u|²_{H^{3/2}} ≤ (1/8) |u′|²_{H^{1/2}} + slack`.
pub fn seminorm_comparison_check<T: Real>(u: &ScalarField1D<T>, slack: T) -> Result<InequalityCheck<T>> {
    let lhs = h32_seminorm(u)?;
    let rhs = h12_seminorm_of_derivative(u) / T::lit(8.0);
    Ok(InequalityCheck { lhs, rhs, pass: lhs <= rhs + slack })
}
