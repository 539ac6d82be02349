//! Estimators for the transition-layer constants.
//!
//! * `m`: optimal cost of an interior wall, `inf ∫ W(f) + |f″|²` over profiles
//!   joining the two wells of `W`.
//! * `σ(z, ξ)`: the same energy on a half-line, from the value `ξ` at the wall
//!   to the constant `z` far away.
//! * `c̲`, `c̄`: boundary wall costs `inf κ |f′|²_{H^{1/2}} + ∫ V(f)` with
//!   `κ = 1/8` on the truncation interval and `κ = 7/16` on the whole line.
//! * `c_δ`: the `c̲` energy between the values `α + δ` and `β − δ`.
//!
//! Profiles are minimized on uniform grids with the ends frozen. For `m` and
//! `σ` the energy of a fixed profile does not depend on the truncation, so
//! larger intervals only enlarge the admissible class. The fractional energies
//! behave differently: for a profile `g` on `(−1, 1)` stretched to `(−R, R)`,
//! `E_R = κ A(g) / R² + R B(g)` exactly, also after discretization with a
//! fixed number of cells. The half-width is therefore part of the
//! minimization; [`compute_c_under`] and its siblings alternate between a
//! profile solve and the closed-form optimal half-width
//! `S* = (2κA/B)^{1/3}` until the width settles.

use rayon::prelude::*;
use serde::Serialize;

use crate::energy::fractional::{CellMap, H12Form};
use crate::energy::EnergyBreakdown;
use crate::error::{Error, Result};
use crate::grid::{Grid1D, ScalarField1D};
use crate::optimize::{minimize, Constraint, MinimizeOptions, Objective, OptimizeResult, ProfileEnergy};
use crate::potentials::DoubleWell;
use crate::scalar::Real;
use crate::sum::pairwise_sum_by;

/// Which constant an estimate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantKind {
    M,
    Sigma,
    CUnder,
    COver,
    CDelta,
}

impl ConstantKind {
    pub fn name(self) -> &'static str {
        match self {
            ConstantKind::M => "m",
            ConstantKind::Sigma => "sigma",
            ConstantKind::CUnder => "c_under",
            ConstantKind::COver => "c_over",
            ConstantKind::CDelta => "c_delta",
        }
    }

    /// Fractional coefficient `κ` of the boundary constants.
    pub fn kappa<T: Real>(self) -> Option<T> {
        match self {
            ConstantKind::CUnder | ConstantKind::CDelta => Some(T::lit(0.125)),
            ConstantKind::COver => Some(T::lit(7.0 / 16.0)),
            _ => None,
        }
    }

    fn form(self) -> H12Form {
        H12Form { map: CellMap::Derivative, full_line: self == ConstantKind::COver }
    }
}

impl std::str::FromStr for ConstantKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "m" => ConstantKind::M,
            "sigma" => ConstantKind::Sigma,
            "c_under" => ConstantKind::CUnder,
            "c_over" => ConstantKind::COver,
            "c_delta" => ConstantKind::CDelta,
            other => return Err(Error::InvalidArgument(format!("unknown constant '{other}'"))),
        })
    }
}

/// Post-hoc check of the range condition in the definition of `c_δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangeAudit<T> {
    pub min: T,
    pub max: T,
    /// Whether the profile stays within `[α + δ, β − δ]` up to `1e-6`.
    pub within: bool,
}

/// Numerical estimate of one constant.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantEstimate<T> {
    pub kind: ConstantKind,
    /// Energy of `profile`, re-evaluated.
    pub value: T,
    /// Half-width (or length, for `σ`) of the interval the profile lives on.
    pub r: T,
    pub n: usize,
    /// Richardson extrapolation from `n / 2` and `n` cells.
    pub extrapolated: Option<T>,
    pub profile: ScalarField1D<T>,
    pub breakdown: EnergyBreakdown<T>,
    pub converged: bool,
    pub iterations: usize,
    pub grad_norm: T,
    /// Only for `c_δ`.
    pub audit: Option<RangeAudit<T>>,
}

/// Settings shared by the estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions<T> {
    pub minimize: MinimizeOptions<T>,
    /// Also solve on `n / 2` cells and extrapolate.
    pub richardson: bool,
    /// For the fractional constants: stop adjusting the half-width once
    /// `|S*/R − 1|` falls below this.
    pub scale_tol: T,
    pub max_scale_steps: usize,
}

impl<T: Real> Default for EstimateOptions<T> {
    fn default() -> Self {
        Self { minimize: MinimizeOptions::default(), richardson: true, scale_tol: T::lit(1e-3), max_scale_steps: 40 }
    }
}

fn check_positive<T: Real>(what: &str, v: T) -> Result<()> {
    if !(v > T::zero()) || !v.is_finite() {
        return Err(Error::InvalidArgument(format!("{what} must be positive, got {v}")));
    }
    Ok(())
}

fn blend<T: Real>(grid: &Grid1D<T>, from: T, to: T, shape: impl Fn(T) -> T) -> Vec<T> {
    grid.nodes().into_iter().map(|x| from + (to - from) * shape(x)).collect()
}

/// Runs [`minimize`] from each init in parallel and keeps the lowest energy
/// (the earliest init on ties).
fn best_of<T: Real, O: Objective<T>>(
    obj: &O,
    inits: Vec<Vec<T>>,
    constraints: &[Constraint<T>],
    opts: &MinimizeOptions<T>,
) -> Result<OptimizeResult<T>> {
    let results: Vec<Result<OptimizeResult<T>>> =
        inits.into_par_iter().map(|x0| minimize(obj, x0, constraints, opts)).collect();
    let mut best: Option<OptimizeResult<T>> = None;
    for r in results {
        let r = r?;
        let better = match &best {
            None => true,
            Some(b) => r.breakdown.total < b.breakdown.total,
        };
        if better {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one start"))
}

/// Every other node of a vector with an even number of cells.
fn coarsen<T: Real>(v: &[T]) -> Vec<T> {
    v.iter().step_by(2).copied().collect()
}

fn richardson<T: Real>(fine: T, coarse: T) -> T {
    fine + (fine - coarse) / T::lit(3.0)
}

fn finish<T: Real>(
    kind: ConstantKind,
    grid: Grid1D<T>,
    r: T,
    out: OptimizeResult<T>,
    extrapolated: Option<T>,
) -> Result<ConstantEstimate<T>> {
    let n = grid.cells();
    Ok(ConstantEstimate {
        kind,
        value: out.breakdown.total,
        r,
        n,
        extrapolated,
        profile: ScalarField1D::new(grid, out.x)?,
        breakdown: out.breakdown,
        converged: out.converged,
        iterations: out.iterations,
        grad_norm: out.grad_norm,
        audit: None,
    })
}

fn local_energy<T: Real>(grid: Grid1D<T>, w: &DoubleWell<T>) -> ProfileEnergy<T> {
    ProfileEnergy::new(grid).with_bending(T::one()).with_bulk(w.clone(), T::one())
}

/// Estimate of `m` on `(−R, R)` with two frozen nodes at each end.
pub fn compute_m<T: Real>(w: &DoubleWell<T>, r: T, n: usize) -> Result<ConstantEstimate<T>> {
    compute_m_with(w, r, n, &EstimateOptions::default())
}

pub fn compute_m_with<T: Real>(
    w: &DoubleWell<T>,
    r: T,
    n: usize,
    opts: &EstimateOptions<T>,
) -> Result<ConstantEstimate<T>> {
    check_positive("R", r)?;
    let (a, b) = w.wells();
    let solve = |cells: usize, warm: Option<Vec<T>>| -> Result<(Grid1D<T>, OptimizeResult<T>)> {
        let grid = Grid1D::new(-r, r, cells)?;
        let obj = local_energy(grid, w);
        let cons = [Constraint::clamp_ends(grid.len(), a, b)];
        let inits = match warm {
            Some(x) => vec![x],
            None => vec![
                blend(&grid, a, b, |x| (x + r) / (r + r)),
                blend(&grid, a, b, |x| (T::one() + x.tanh()) / T::lit(2.0)),
            ],
        };
        Ok((grid, best_of(&obj, inits, &cons, &opts.minimize)?))
    };
    let (grid, out) = solve(n, None)?;
    let extrapolated = if opts.richardson && n.is_multiple_of(2) && n >= 16 {
        let (_, coarse) = solve(n / 2, Some(coarsen(&out.x)))?;
        Some(richardson(out.breakdown.total, coarse.breakdown.total))
    } else {
        None
    };
    finish(ConstantKind::M, grid, r, out, extrapolated)
}

/// Estimate of `σ(z, ξ)` on `(0, R)`: node 0 frozen at `ξ`, the last two at `z`.
pub fn compute_sigma<T: Real>(w: &DoubleWell<T>, z: T, xi: T, r: T, n: usize) -> Result<ConstantEstimate<T>> {
    compute_sigma_with(w, z, xi, r, n, &EstimateOptions::default())
}

pub fn compute_sigma_with<T: Real>(
    w: &DoubleWell<T>,
    z: T,
    xi: T,
    r: T,
    n: usize,
    opts: &EstimateOptions<T>,
) -> Result<ConstantEstimate<T>> {
    check_positive("R", r)?;
    let solve = |cells: usize, warm: Option<Vec<T>>| -> Result<(Grid1D<T>, OptimizeResult<T>)> {
        let grid = Grid1D::new(T::zero(), r, cells)?;
        let obj = local_energy(grid, w);
        let cons = [Constraint::DirichletNodes { nodes: vec![(0, xi), (cells - 1, z), (cells, z)] }];
        let inits = match warm {
            Some(x) => vec![x],
            None => vec![blend(&grid, xi, z, |x| x / r), blend(&grid, xi, z, |x| x.tanh())],
        };
        Ok((grid, best_of(&obj, inits, &cons, &opts.minimize)?))
    };
    let (grid, out) = solve(n, None)?;
    let extrapolated = if opts.richardson && n.is_multiple_of(2) && n >= 16 {
        let (_, coarse) = solve(n / 2, Some(coarsen(&out.x)))?;
        Some(richardson(out.breakdown.total, coarse.breakdown.total))
    } else {
        None
    };
    finish(ConstantKind::Sigma, grid, r, out, extrapolated)
}

/// The boundary-wall energy `κ |f′|² + ∫ V(f)` on `(−R, R)`.
pub fn boundary_wall_energy<T: Real>(
    kind: ConstantKind,
    grid: Grid1D<T>,
    v: &DoubleWell<T>,
) -> Result<ProfileEnergy<T>> {
    let kappa =
        kind.kappa().ok_or_else(|| Error::InvalidArgument(format!("{} is not a boundary constant", kind.name())))?;
    Ok(ProfileEnergy::new(grid).with_fractional(kind.form(), kappa).with_boundary(v.clone(), T::one()))
}

/// `(A, B)` of a profile mapped onto `(−1, 1)`: the seminorm and the potential integral.
pub fn unit_scale_parts<T: Real>(kind: ConstantKind, profile: &ScalarField1D<T>, v: &DoubleWell<T>) -> Result<(T, T)> {
    let unit = profile.relabeled(-T::one(), T::one())?;
    let h = unit.grid().h();
    let a = kind.form().value(unit.values(), h);
    let b = crate::energy::potential_integral(&unit, v);
    Ok((a, b))
}

fn boundary_constant<T: Real>(
    kind: ConstantKind,
    v: &DoubleWell<T>,
    left: T,
    right: T,
    frozen_per_end: usize,
    r0: T,
    n: usize,
    opts: &EstimateOptions<T>,
) -> Result<ConstantEstimate<T>> {
    check_positive("R", r0)?;
    let kappa: T = kind.kappa().expect("boundary constant");
    let constraints = |cells: usize| {
        let mut nodes = Vec::new();
        for k in 0..frozen_per_end {
            nodes.push((k, left));
            nodes.push((cells - k, right));
        }
        [Constraint::DirichletNodes { nodes }]
    };
    let solve = |r: T, cells: usize, warm: Option<Vec<T>>| -> Result<(Grid1D<T>, OptimizeResult<T>)> {
        let grid = Grid1D::new(-r, r, cells)?;
        let obj = boundary_wall_energy(kind, grid, v)?;
        let inits = match warm {
            Some(x) => vec![x],
            None => vec![
                blend(&grid, left, right, |x| (x + r) / (r + r)),
                blend(&grid, left, right, |x| (T::one() + (T::lit(3.0) * x / r).tanh()) / T::lit(2.0)),
            ],
        };
        Ok((grid, best_of(&obj, inits, &constraints(cells), &opts.minimize)?))
    };
    let mut r = r0;
    let (mut grid, mut out) = solve(r, n, None)?;
    let mut iterations = out.iterations;
    for _ in 0..opts.max_scale_steps {
        let profile = ScalarField1D::new(grid, out.x.clone())?;
        let (a, b) = unit_scale_parts(kind, &profile, v)?;
        if !(a > T::zero() && b > T::zero()) {
            break;
        }
        let (s_star, _) = scale_optimal_value(a, b, kappa)?;
        if ((s_star / r) - T::one()).abs() < opts.scale_tol {
            break;
        }
        r = s_star;
        let (g, o) = solve(r, n, Some(out.x.clone()))?;
        iterations += o.iterations;
        grid = g;
        out = o;
    }
    out.iterations = iterations;
    let extrapolated = if opts.richardson && n.is_multiple_of(2) && n >= 16 {
        let (_, coarse) = solve(r, n / 2, Some(coarsen(&out.x)))?;
        Some(richardson(out.breakdown.total, coarse.breakdown.total))
    } else {
        None
    };
    finish(kind, grid, r, out, extrapolated)
}

/// Estimate of `c̲`: `(1/8) |f′|²_{H^{1/2}(−R,R)} + ∫ V(f)` with two frozen
/// nodes at each end. `r` is the starting half-width; the returned estimate
/// carries the scale-optimal half-width it settled on.
pub fn compute_c_under<T: Real>(v: &DoubleWell<T>, r: T, n: usize) -> Result<ConstantEstimate<T>> {
    compute_c_under_with(v, r, n, &EstimateOptions::default())
}

pub fn compute_c_under_with<T: Real>(
    v: &DoubleWell<T>,
    r: T,
    n: usize,
    opts: &EstimateOptions<T>,
) -> Result<ConstantEstimate<T>> {
    let (a, b) = v.wells();
    boundary_constant(ConstantKind::CUnder, v, a, b, 2, r, n, opts)
}

/// Estimate of `c̄`: as [`compute_c_under`] with `κ = 7/16` and the
/// seminorm taken over the whole line (the profile is constant outside the grid).
pub fn compute_c_over<T: Real>(v: &DoubleWell<T>, r: T, n: usize) -> Result<ConstantEstimate<T>> {
    compute_c_over_with(v, r, n, &EstimateOptions::default())
}

pub fn compute_c_over_with<T: Real>(
    v: &DoubleWell<T>,
    r: T,
    n: usize,
    opts: &EstimateOptions<T>,
) -> Result<ConstantEstimate<T>> {
    let (a, b) = v.wells();
    boundary_constant(ConstantKind::COver, v, a, b, 2, r, n, opts)
}

/// Estimate of `c_δ`: the `c̲` energy with the end values frozen at `α + δ`
/// and `β − δ`. The range condition is audited on the result, not imposed.
pub fn compute_c_delta<T: Real>(v: &DoubleWell<T>, delta: T, r: T, n: usize) -> Result<ConstantEstimate<T>> {
    compute_c_delta_with(v, delta, r, n, &EstimateOptions::default())
}

pub fn compute_c_delta_with<T: Real>(
    v: &DoubleWell<T>,
    delta: T,
    r: T,
    n: usize,
    opts: &EstimateOptions<T>,
) -> Result<ConstantEstimate<T>> {
    let (a, b) = v.wells();
    if !(delta > T::zero() && delta < (b - a) / T::lit(2.0)) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, (β−α)/2), got {delta}")));
    }
    let (lo, hi) = (a + delta, b - delta);
    let mut est = boundary_constant(ConstantKind::CDelta, v, lo, hi, 2, r, n, opts)?;
    let vals = est.profile.values();
    let min = vals.iter().copied().fold(T::infinity(), T::min);
    let max = vals.iter().copied().fold(T::neg_infinity(), T::max);
    let slack = T::lit(1e-6);
    est.audit = Some(RangeAudit { min, max, within: min >= lo - slack && max <= hi + slack });
    Ok(est)
}

/// Minimizer and minimum of `S ↦ κA/S² + S·B` over `S > 0`.
pub fn scale_optimal_value<T: Real>(a: T, b: T, kappa: T) -> Result<(T, T)> {
    check_positive("A", a)?;
    check_positive("B", b)?;
    check_positive("kappa", kappa)?;
    let third = T::one() / T::lit(3.0);
    let s = (T::lit(2.0) * kappa * a / b).powf(third);
    let value =
        T::lit(3.0) * T::lit(2.0).powf(-T::lit(2.0) * third) * (kappa * a).powf(third) * b.powf(T::lit(2.0) * third);
    Ok((s, value))
}

/// Closed-form scale-optimized energy of an estimate's profile: the profile is
/// mapped onto `(−1, 1)` and `min_S κA/S² + S·B` is returned.
pub fn characterize<T: Real>(estimate: &ConstantEstimate<T>, v: &DoubleWell<T>, kappa: T) -> Result<T> {
    let (a, b) = unit_scale_parts(estimate.kind, &estimate.profile, v)?;
    Ok(scale_optimal_value(a, b, kappa)?.1)
}

/// Which end of a profile a matching cubic attaches to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    /// The well lies at `anchor − span`.
    Left,
    /// The well lies at `anchor + span`.
    Right,
}

/// Cubic joining a well (value, zero slope) to a value `w` and slope `z` at `anchor`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicMatch<T> {
    pub side: Side,
    pub well: T,
    pub w: T,
    pub z: T,
    pub anchor: T,
    pub span: T,
}

impl<T: Real> CubicMatch<T> {
    /// Coefficients `[c0, c1, c2, c3]` in the local variable `s ∈ [0, 1]`,
    /// which is 0 at the well and 1 at the anchor.
    pub fn coefficients(&self) -> [T; 4] {
        let three = T::lit(3.0);
        let two = T::lit(2.0);
        // slope with respect to s, pointing from the well towards the anchor
        let zs = match self.side {
            Side::Left => self.z * self.span,
            Side::Right => -self.z * self.span,
        };
        [self.well, T::zero(), three * self.w - three * self.well - zs, zs + two * self.well - two * self.w]
    }

    fn local(&self, x: T) -> T {
        match self.side {
            Side::Left => (x - self.anchor + self.span) / self.span,
            Side::Right => (self.anchor + self.span - x) / self.span,
        }
    }

    pub fn eval(&self, x: T) -> T {
        let s = self.local(x);
        let c = self.coefficients();
        c[0] + s * s * (c[2] + s * c[3])
    }

    pub fn deriv(&self, x: T) -> T {
        let s = self.local(x);
        let c = self.coefficients();
        let ds = s * (T::lit(2.0) * c[2] + T::lit(3.0) * s * c[3]);
        match self.side {
            Side::Left => ds / self.span,
            Side::Right => -ds / self.span,
        }
    }
}

/// The unit-span matching cubic.
pub fn cubic_match<T: Real>(side: Side, well: T, w: T, z: T, anchor: T) -> CubicMatch<T> {
    CubicMatch { side, well, w, z, anchor, span: T::one() }
}

/// One-sided second-order slope at each end of a profile.
pub fn end_slopes<T: Real>(f: &ScalarField1D<T>) -> (T, T) {
    let v = f.values();
    let n = v.len() - 1;
    let h2 = f.grid().h() * T::lit(2.0);
    let three = T::lit(3.0);
    let four = T::lit(4.0);
    ((-three * v[0] + four * v[1] - v[2]) / h2, (three * v[n] - four * v[n - 1] + v[n - 2]) / h2)
}

/// Extends `f` by about one unit on each side with matching cubics that land
/// on the wells with zero slope, followed by two constant cells.
pub fn extend_profile<T: Real>(f: &ScalarField1D<T>, wells: (T, T)) -> Result<ScalarField1D<T>> {
    let g = f.grid();
    let h = g.h();
    let (alpha, beta) = wells;
    let v = f.values();
    let n = g.cells();
    let (z1, z2) = end_slopes(f);
    let (w1, w2) = (v[0], v[n]);
    let close1 = z1.abs() + (w1 - alpha).abs();
    let close2 = z2.abs() + (w2 - beta).abs();
    if close1 > T::one() || close2 > T::one() {
        return Err(Error::InvalidArgument(format!(
            "profile ends are too far from the wells (|z|+|w−well| = {close1}, {close2}; need ≤ 1)"
        )));
    }
    let m = (T::one() / h).round().to_usize().unwrap_or(1).max(1);
    let span = T::of(m) * h;
    let pad = m + 2;
    let left = CubicMatch { side: Side::Left, well: alpha, w: w1, z: z1, anchor: g.lo(), span };
    let right = CubicMatch { side: Side::Right, well: beta, w: w2, z: z2, anchor: g.hi(), span };
    let ext = g.extended(pad, pad);
    let values = (0..ext.len())
        .map(|i| {
            if i < pad {
                let x = ext.node(i);
                if i < 2 {
                    alpha
                } else {
                    left.eval(x)
                }
            } else if i <= pad + n {
                v[i - pad]
            } else {
                let x = ext.node(i);
                if i > pad + n + m {
                    beta
                } else {
                    right.eval(x)
                }
            }
        })
        .collect();
    ScalarField1D::new(ext, values)
}

/// Result of an interval-doubling study.
#[derive(Debug, Clone, PartialEq)]
pub struct RSelection<T> {
    pub estimate: ConstantEstimate<T>,
    /// `(R, value)` for every solve performed.
    pub trail: Vec<(T, T)>,
    /// Whether the last doubling changed the value by less than the tolerance.
    pub settled: bool,
}

/// Doubles the interval at fixed spacing until the estimate changes by less
/// than `rel_tol`. `solve(R, n)` must return the estimate for one interval.
pub fn select_r<T: Real, F>(r0: T, n0: usize, rel_tol: T, max_doublings: usize, solve: F) -> Result<RSelection<T>>
where
    F: Fn(T, usize) -> Result<ConstantEstimate<T>>,
{
    let mut est = solve(r0, n0)?;
    let mut trail = vec![(r0, est.value)];
    let (mut r, mut n) = (r0, n0);
    for _ in 0..max_doublings {
        r = r + r;
        n *= 2;
        let next = solve(r, n)?;
        trail.push((r, next.value));
        let change = (next.value - est.value).abs() / next.value.abs().max(T::min_positive_value());
        est = next;
        if change < rel_tol {
            return Ok(RSelection { estimate: est, trail, settled: true });
        }
    }
    Ok(RSelection { estimate: est, trail, settled: false })
}

/// `∫ V(p)` over the unit span of a matching cubic, by composite Simpson.
pub fn cubic_potential<T: Real>(p: &CubicMatch<T>, v: &DoubleWell<T>, panels: usize) -> T {
    let panels = panels + panels % 2;
    let (lo, hi) = match p.side {
        Side::Left => (p.anchor - p.span, p.anchor),
        Side::Right => (p.anchor, p.anchor + p.span),
    };
    let h = (hi - lo) / T::of(panels);
    let s = pairwise_sum_by(panels + 1, |k| {
        let w = if k == 0 || k == panels {
            T::one()
        } else if k % 2 == 1 {
            T::lit(4.0)
        } else {
            T::lit(2.0)
        };
        w * v.eval(p.eval(lo + T::of(k) * h))
    });
    s * h / T::lit(3.0)
}
