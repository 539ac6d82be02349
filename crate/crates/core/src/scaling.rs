//! ε-sweeps of the bulk, boundary and full energies along `ε λ^{2/3} = L`.
//!
//! Each sweep minimizes one functional per `ε` from an initializer built out
//! of rescaled optimal profiles, and records the minimum with its breakdown.
//! Records are computed in parallel and returned in the order of `eps_list`.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{compute_c_under_with, compute_m_with, cubic_match, EstimateOptions, Side};
use crate::energy::fractional::{CellMap, H12Form};
use crate::energy::{second_derivative, EnergyBreakdown, EpsLambda, HessianOperator};
use crate::error::{Error, Result};
use crate::grid::{Edge, Grid1D, Grid2D, ScalarField1D, ScalarField2D, Shape};
use crate::optimize::{make_feasible, minimize, Constraint, FieldEnergy, MinimizeOptions, Objective, ProfileEnergy};
use crate::potentials::DoubleWell;
use crate::scalar::Real;
use crate::sum::pairwise_sum_by;

/// Largest cell count per axis of a 2-D sweep.
pub const MAX_2D_CELLS: usize = 192;

/// Smallest `ε` accepted by a 2-D sweep.
pub const MIN_2D_EPS: f64 = 1.0 / 48.0;

/// Initial field of every minimization in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    LinearInterp,
    ProfileAnsatz,
    BoundaryLayerAnsatz,
}

/// Discretized domain of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepDomain<T> {
    Interval {
        lo: T,
        hi: T,
        n: usize,
    },
    /// The boundary term acts on the bottom edge.
    Rectangle {
        width: T,
        height: T,
        nx: usize,
        ny: usize,
    },
}

#[derive(Clone)]
pub struct SweepConfig<T> {
    /// Target `ε λ^{2/3}`.
    pub l: T,
    /// Strictly decreasing.
    pub eps_list: Vec<T>,
    pub bulk: DoubleWell<T>,
    pub boundary: DoubleWell<T>,
    pub domain: SweepDomain<T>,
    /// Band for the average of the field (the trace, for the boundary sweep).
    pub mass: Option<(T, T)>,
    /// Band for the average of the bottom trace (2-D only).
    pub boundary_mass: Option<(T, T)>,
    pub init: InitKind,
    /// Holds `λ` fixed instead of deriving it from `L`.
    pub lambda_override: Option<T>,
    pub minimize: MinimizeOptions<T>,
    /// Optimal interior-wall profile for the ansatz; computed when absent.
    pub m_profile: Option<ScalarField1D<T>>,
    /// Optimal boundary-wall profile for the ansatz; computed when absent.
    pub c_profile: Option<ScalarField1D<T>>,
}

impl<T: Real> SweepConfig<T> {
    pub fn new(l: T, eps_list: Vec<T>, bulk: DoubleWell<T>, boundary: DoubleWell<T>, domain: SweepDomain<T>) -> Self {
        Self {
            l,
            eps_list,
            bulk,
            boundary,
            domain,
            mass: None,
            boundary_mass: None,
            init: InitKind::ProfileAnsatz,
            lambda_override: None,
            minimize: MinimizeOptions::default(),
            m_profile: None,
            c_profile: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l > T::zero()) || !self.l.is_finite() {
            return Err(Error::InvalidArgument(format!("L must be positive, got {}", self.l)));
        }
        if self.eps_list.is_empty() {
            return Err(Error::InvalidArgument("eps list is empty".into()));
        }
        if self.eps_list.iter().any(|&e| !(e > T::zero()) || !e.is_finite()) {
            return Err(Error::InvalidArgument("eps values must be positive".into()));
        }
        if self.eps_list.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidArgument("eps list must be strictly decreasing".into()));
        }
        if let Some(l) = self.lambda_override {
            if !(l > T::zero()) {
                return Err(Error::InvalidArgument(format!("lambda must be positive, got {l}")));
            }
        }
        for band in [self.mass, self.boundary_mass].into_iter().flatten() {
            if !(band.0 < band.1) {
                return Err(Error::InvalidArgument("mass band must satisfy lo < hi".into()));
            }
        }
        Ok(())
    }

    /// `λ` for one `ε`: `(L/ε)^{3/2}` unless overridden.
    pub fn lambda_for(&self, eps: T) -> T {
        self.lambda_override.unwrap_or_else(|| (self.l / eps).powf(T::lit(1.5)))
    }
}

/// One minimization of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord<T> {
    pub eps: T,
    pub lambda: T,
    /// `ε λ^{2/3}`.
    pub l: T,
    /// Equals `breakdown.total`.
    pub min_energy: T,
    pub breakdown: EnergyBreakdown<T>,
    /// Energy of the (feasible) initializer.
    pub init_energy: T,
    pub converged: bool,
    pub iterations: usize,
    pub grad_norm: T,
    pub wall_ms: u64,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub minimizer: Vec<T>,
}

/// Interior-wall ansatz `x ↦ f((x − jump_at)/ε)` with `f` continued by its end values.
pub fn profile_ansatz_1d<T: Real>(
    m_profile: &ScalarField1D<T>,
    eps: T,
    jump_at: T,
    grid: Grid1D<T>,
) -> Result<ScalarField1D<T>> {
    if !(eps > T::zero()) {
        return Err(Error::InvalidArgument(format!("need eps > 0, got {eps}")));
    }
    let pg = m_profile.grid();
    let slack = T::lit(1e-12) * (grid.length() + eps * pg.length());
    if jump_at + eps * pg.lo() < grid.lo() - slack || jump_at + eps * pg.hi() > grid.hi() + slack {
        return Err(Error::InvalidArgument(format!(
            "ansatz window [{}, {}] exceeds the domain [{}, {}]",
            jump_at + eps * pg.lo(),
            jump_at + eps * pg.hi(),
            grid.lo(),
            grid.hi()
        )));
    }
    ScalarField1D::sample(grid, |x| m_profile.eval_at((x - jump_at) / eps))
}

/// `∫_{−R}^{s} f` for `f` continued by its end values.
fn continued_integral<T: Real>(f: &ScalarField1D<T>, anti: &crate::grid::Antiderivative<T>, s: T) -> T {
    let g = f.grid();
    let v = f.values();
    if s <= g.lo() {
        v[0] * (s - g.lo())
    } else if s >= g.hi() {
        anti.at_node(g.cells()) + v[g.cells()] * (s - g.hi())
    } else {
        anti.at(s)
    }
}

/// Boundary-layer ansatz on a rectangle whose bottom edge carries the wall.
///
/// The trace is `g(x) = f((x − jump_at)/ρ)` with `ρ = ε λ^{−1/3}`. Near the
/// bottom the field is the averaging extension of `g`; it is blended into
/// `interior` (or into `g` itself, constant in `y`, when absent) by a cubic in
/// `y` that is flat at both ends of the layer `0 ≤ y ≤ 2ρR`.
pub fn boundary_layer_ansatz_2d<T: Real>(
    c_profile: &ScalarField1D<T>,
    el: &EpsLambda<T>,
    grid: Arc<Grid2D<T>>,
    jump_at: T,
    interior: Option<&ScalarField2D<T>>,
) -> Result<ScalarField2D<T>> {
    let (width, height) = match grid.shape() {
        Shape::Rectangle { width, height } => (width, height),
        _ => return Err(Error::InvalidGrid("the boundary-layer ansatz needs a rectangle".into())),
    };
    if let Some(f) = interior {
        if !Arc::ptr_eq(f.grid(), &grid) && **f.grid() != *grid {
            return Err(Error::InvalidGrid("interior field lives on another grid".into()));
        }
    }
    let rho = el.rho();
    let half = c_profile.grid().length() / T::lit(2.0);
    let reach = rho * half;
    if reach > width.min(height) / T::lit(2.0) {
        return Err(Error::InvalidArgument(format!(
            "layer half-width ρR = {reach} exceeds half the domain ({})",
            width.min(height) / T::lit(2.0)
        )));
    }
    let anti = c_profile.antiderivative();
    let centre = (c_profile.grid().lo() + c_profile.grid().hi()) / T::lit(2.0);
    let local = |x: T| centre + (x - jump_at) / rho;
    let trace = |x: T| c_profile.eval_at(local(x));
    let depth = reach + reach;
    let blend = cubic_match(Side::Right, T::zero(), T::one(), T::zero(), T::zero());
    let x0 = grid.origin().0;
    let values = (0..grid.node_count())
        .map(|idx| {
            let (i, j) = grid.coords(idx);
            let x = x0 + T::of(i) * grid.hx();
            let y = T::of(j) * grid.hy();
            let g = trace(x);
            let base = interior.map_or(g, |f| f.values()[idx]);
            if j == 0 {
                return g;
            }
            if y >= depth {
                return base;
            }
            let a = continued_integral(c_profile, &anti, local(x - y));
            let b = continued_integral(c_profile, &anti, local(x + y));
            let avg = rho * (b - a) / (y + y);
            let phi = blend.eval(y / depth);
            base + phi * (avg - base)
        })
        .collect();
    ScalarField2D::new(grid, values)
}

/// Position of a single wall between `left` and `right` that gives the
/// average `target` over `[lo, hi]`.
pub fn jump_for_average<T: Real>(lo: T, hi: T, left: T, right: T, target: T) -> T {
    let frac = (right - target) / (right - left);
    lo + frac.max(T::zero()).min(T::one()) * (hi - lo)
}

fn seed_options<T: Real>(opts: &MinimizeOptions<T>) -> EstimateOptions<T> {
    EstimateOptions { minimize: *opts, richardson: false, ..EstimateOptions::default() }
}

fn m_seed<T: Real>(cfg: &SweepConfig<T>) -> Result<ScalarField1D<T>> {
    match &cfg.m_profile {
        Some(p) => Ok(p.clone()),
        None => Ok(compute_m_with(&cfg.bulk, T::lit(4.0), 256, &seed_options(&cfg.minimize))?.profile),
    }
}

fn c_seed<T: Real>(cfg: &SweepConfig<T>) -> Result<ScalarField1D<T>> {
    match &cfg.c_profile {
        Some(p) => Ok(p.clone()),
        None => Ok(compute_c_under_with(&cfg.boundary, T::one(), 128, &seed_options(&cfg.minimize))?.profile),
    }
}

fn interval<T: Real>(cfg: &SweepConfig<T>) -> Result<Grid1D<T>> {
    match cfg.domain {
        SweepDomain::Interval { lo, hi, n } => Grid1D::new(lo, hi, n),
        SweepDomain::Rectangle { .. } => Err(Error::InvalidArgument("this sweep runs on an interval".into())),
    }
}

fn mass_constraint_1d<T: Real>(grid: &Grid1D<T>, band: Option<(T, T)>) -> Result<Vec<Constraint<T>>> {
    band.map(|b| Constraint::mass_midpoint(grid.trapezoid_weights(), b)).into_iter().collect()
}

fn linear_1d<T: Real>(grid: &Grid1D<T>, from: T, to: T) -> Vec<T> {
    grid.nodes().into_iter().map(|x| from + (to - from) * (x - grid.lo()) / grid.length()).collect()
}

fn run_one<T: Real, O: Objective<T>>(
    eps: T,
    lambda: T,
    obj: &O,
    init: Vec<T>,
    constraints: &[Constraint<T>],
    opts: &MinimizeOptions<T>,
    extra_starts: Vec<Vec<T>>,
    warnings: Vec<String>,
) -> Result<SweepRecord<T>> {
    let start = Instant::now();
    let mut x0 = init;
    make_feasible(&mut x0, constraints)?;
    let mut init_energy = obj.value(&x0);
    let mut out = minimize(obj, x0, constraints, opts)?;
    for c in extra_starts {
        let other = minimize(obj, c.clone(), constraints, opts)?;
        if other.breakdown.total < out.breakdown.total {
            init_energy = obj.value(&c);
            out = other;
        }
    }
    Ok(SweepRecord {
        eps,
        lambda,
        l: eps * lambda.powf(T::lit(2.0 / 3.0)),
        min_energy: out.breakdown.total,
        breakdown: out.breakdown,
        init_energy,
        converged: out.converged,
        iterations: out.iterations,
        grad_norm: out.grad_norm,
        wall_ms: start.elapsed().as_millis() as u64,
        warnings,
        minimizer: out.x,
    })
}

/// Constant starts at both wells, used when no constraint forces a wall.
fn wells_if_free<T: Real>(constraints: &[Constraint<T>], dim: usize, wells: (T, T)) -> Vec<Vec<T>> {
    if constraints.is_empty() {
        vec![vec![wells.0; dim], vec![wells.1; dim]]
    } else {
        Vec::new()
    }
}

fn collect<T: Real>(results: Vec<Result<SweepRecord<T>>>) -> Result<Vec<SweepRecord<T>>> {
    results.into_iter().collect()
}

/// Minimizes `ε³ ∫|f″|² + (1/ε) ∫W(f)` for every `ε`, with the mass band forcing a wall.
pub fn sweep_f1d<T: Real>(cfg: &SweepConfig<T>) -> Result<Vec<SweepRecord<T>>> {
    cfg.validate()?;
    let grid = interval(cfg)?;
    let (a, b) = cfg.bulk.wells();
    let seed = match cfg.init {
        InitKind::LinearInterp => None,
        InitKind::ProfileAnsatz => Some(m_seed(cfg)?),
        InitKind::BoundaryLayerAnsatz => {
            return Err(Error::InvalidArgument("the bulk sweep has no boundary layer".into()))
        }
    };
    let constraints = mass_constraint_1d(&grid, cfg.mass)?;
    let target = cfg.mass.map_or((a + b) / T::lit(2.0), |m| (m.0 + m.1) / T::lit(2.0));
    let jump = jump_for_average(grid.lo(), grid.hi(), a, b, target);
    let results = cfg
        .eps_list
        .par_iter()
        .map(|&eps| {
            let mut warnings = Vec::new();
            let h = grid.h();
            if eps / h < T::lit(4.0) {
                warnings.push(format!("eps/h = {} < 4: transition layer under-resolved", eps / h));
            }
            let init = match &seed {
                None => linear_1d(&grid, a, b),
                Some(p) => match profile_ansatz_1d(p, eps, jump, grid) {
                    Ok(f) => f.into_values(),
                    Err(e) => {
                        warnings.push(format!("ansatz rejected ({e}); linear start used"));
                        linear_1d(&grid, a, b)
                    }
                },
            };
            let obj =
                ProfileEnergy::new(grid).with_bending(eps * eps * eps).with_bulk(cfg.bulk.clone(), T::one() / eps);
            run_one(
                eps,
                cfg.lambda_for(eps),
                &obj,
                init,
                &constraints,
                &cfg.minimize,
                wells_if_free(&constraints, obj.dim(), (a, b)),
                warnings,
            )
        })
        .collect();
    collect(results)
}

/// Minimizes `(ε³/8) |v′|²_{H^{1/2}} + λ ∫V(v)` with `λ = (L/ε)^{3/2}` for every `ε`.
pub fn sweep_g1d<T: Real>(cfg: &SweepConfig<T>) -> Result<Vec<SweepRecord<T>>> {
    cfg.validate()?;
    let grid = interval(cfg)?;
    let (a, b) = cfg.boundary.wells();
    let seed = match cfg.init {
        InitKind::LinearInterp => None,
        InitKind::ProfileAnsatz | InitKind::BoundaryLayerAnsatz => Some(c_seed(cfg)?),
    };
    let constraints = mass_constraint_1d(&grid, cfg.mass)?;
    let target = cfg.mass.map_or((a + b) / T::lit(2.0), |m| (m.0 + m.1) / T::lit(2.0));
    let jump = jump_for_average(grid.lo(), grid.hi(), a, b, target);
    let form = H12Form { map: CellMap::Derivative, full_line: false };
    let results = cfg
        .eps_list
        .par_iter()
        .map(|&eps| {
            let lambda = cfg.lambda_for(eps);
            let el = EpsLambda::new(eps, lambda)?;
            let rho = el.rho();
            let mut warnings = Vec::new();
            if rho / grid.h() < T::lit(4.0) {
                warnings.push(format!("rho/h = {} < 4: boundary layer under-resolved", rho / grid.h()));
            }
            let init = match &seed {
                None => linear_1d(&grid, a, b),
                Some(p) => match profile_ansatz_1d(p, rho, jump, grid) {
                    Ok(f) => f.into_values(),
                    Err(e) => {
                        warnings.push(format!("ansatz rejected ({e}); linear start used"));
                        linear_1d(&grid, a, b)
                    }
                },
            };
            let obj = ProfileEnergy::new(grid)
                .with_fractional(form, eps * eps * eps / T::lit(8.0))
                .with_boundary(cfg.boundary.clone(), lambda);
            run_one(
                eps,
                lambda,
                &obj,
                init,
                &constraints,
                &cfg.minimize,
                wells_if_free(&constraints, obj.dim(), (a, b)),
                warnings,
            )
        })
        .collect();
    collect(results)
}

/// Minimizes `ε³ ∬|D²u|² + (1/ε) ∬W(u) + λ ∫_bottom V(u)` on a rectangle for every `ε`.
pub fn sweep_full2d<T: Real>(cfg: &SweepConfig<T>) -> Result<Vec<SweepRecord<T>>> {
    cfg.validate()?;
    let (width, height, nx, ny) = match cfg.domain {
        SweepDomain::Rectangle { width, height, nx, ny } => (width, height, nx, ny),
        SweepDomain::Interval { .. } => {
            return Err(Error::InvalidArgument("the full sweep runs on a rectangle".into()))
        }
    };
    if nx > MAX_2D_CELLS || ny > MAX_2D_CELLS {
        return Err(Error::InvalidArgument(format!("2-D sweeps allow at most {MAX_2D_CELLS} cells per axis")));
    }
    if cfg.eps_list.iter().any(|&e| e < T::lit(MIN_2D_EPS)) {
        return Err(Error::InvalidArgument(format!("2-D sweeps need eps ≥ {MIN_2D_EPS}")));
    }
    let grid = Arc::new(Grid2D::rectangle((T::zero(), T::zero()), width, height, nx, ny)?);
    let op = HessianOperator::new(grid.clone())?;
    let bottom = grid.edge_nodes(Edge::Bottom)?;
    let edge = grid.edge_grid(Edge::Bottom)?;
    let edge_weights = edge.trapezoid_weights();

    let mut constraints = Vec::new();
    if let Some(band) = cfg.mass {
        constraints.push(Constraint::mass_midpoint(grid.weights().to_vec(), band)?);
    }
    if let Some(band) = cfg.boundary_mass {
        let mut w = vec![T::zero(); grid.node_count()];
        for (&k, &wk) in bottom.iter().zip(&edge_weights) {
            w[k] = wk;
        }
        constraints.push(Constraint::mass_midpoint(w, band)?);
    }

    let (a, b) = cfg.bulk.wells();
    let (alpha, beta) = cfg.boundary.wells();
    let half = T::lit(0.5);
    let m_profile = match cfg.init {
        InitKind::LinearInterp => None,
        _ => cfg.mass.map(|_| m_seed(cfg)).transpose()?,
    };
    let c_profile = match cfg.init {
        InitKind::BoundaryLayerAnsatz => cfg.boundary_mass.map(|_| c_seed(cfg)).transpose()?,
        _ => None,
    };
    let wall_x = cfg.mass.map(|m| jump_for_average(T::zero(), width, a, b, (m.0 + m.1) * half));
    let trace_x = cfg.boundary_mass.map(|m| jump_for_average(T::zero(), width, alpha, beta, (m.0 + m.1) * half));
    let linear: Vec<T> = (0..grid.node_count())
        .map(|k| {
            let (i, _) = grid.coords(k);
            a + (b - a) * T::of(i) / T::of(nx)
        })
        .collect();

    let results = cfg
        .eps_list
        .par_iter()
        .map(|&eps| {
            let lambda = cfg.lambda_for(eps);
            let el = EpsLambda::new(eps, lambda)?;
            let h = grid.hx().max(grid.hy());
            let mut warnings = Vec::new();
            if el.rho() / h < T::lit(4.0) {
                warnings.push(format!("rho/h = {} < 4: boundary layer under-resolved", el.rho() / h));
            }
            let interior = match (&m_profile, wall_x) {
                (Some(p), Some(x)) => {
                    let g = Grid1D::new(T::zero(), width, nx)?;
                    match profile_ansatz_1d(p, eps, x, g) {
                        Ok(f) => {
                            let row = f.into_values();
                            let v = (0..grid.node_count()).map(|k| row[grid.coords(k).0]).collect();
                            Some(ScalarField2D::new(grid.clone(), v)?)
                        }
                        Err(e) => {
                            warnings.push(format!("interior ansatz rejected ({e})"));
                            None
                        }
                    }
                }
                _ => None,
            };
            let init = match (&c_profile, trace_x) {
                (Some(p), Some(x)) => match boundary_layer_ansatz_2d(p, &el, grid.clone(), x, interior.as_ref()) {
                    Ok(f) => f.into_values(),
                    Err(e) => {
                        warnings.push(format!("boundary ansatz rejected ({e})"));
                        interior.map_or_else(|| linear.clone(), |f| f.into_values())
                    }
                },
                _ => interior.map_or_else(|| linear.clone(), |f| f.into_values()),
            };
            let obj = FieldEnergy::new(op.clone(), eps * eps * eps)
                .with_bulk(cfg.bulk.clone(), T::one() / eps)
                .with_boundary(cfg.boundary.clone(), lambda, bottom.clone(), edge_weights.clone());
            run_one(
                eps,
                lambda,
                &obj,
                init,
                &constraints,
                &cfg.minimize,
                wells_if_free(&constraints, obj.dim(), (a, b)),
                warnings,
            )
        })
        .collect();
    collect(results)
}

/// Flattening diagnostics of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Plateau<T> {
    /// Minimum energy of the last record.
    pub value: T,
    /// Relative change between the last two records.
    pub last_change: T,
    /// `max / min` of the minimum energies over the sweep.
    pub spread: T,
    /// `last_change ≤ 0.05`.
    pub flat: bool,
}

/// Plateau of a sweep with at least four records.
pub fn plateau<T: Real>(records: &[SweepRecord<T>]) -> Result<Plateau<T>> {
    if records.len() < 4 {
        return Err(Error::InvalidArgument(format!("plateau detection needs ≥ 4 records, got {}", records.len())));
    }
    let n = records.len();
    let (prev, last) = (records[n - 2].min_energy, records[n - 1].min_energy);
    let last_change = (last - prev).abs() / last.abs().max(T::min_positive_value());
    let max = records.iter().map(|r| r.min_energy).fold(T::neg_infinity(), T::max);
    let min = records.iter().map(|r| r.min_energy).fold(T::infinity(), T::min);
    Ok(Plateau { value: last, last_change, spread: max / min, flat: last_change <= T::lit(0.05) })
}

/// Fraction of `ε³ ∫|f″|² + (1/ε) ∫W(f)` carried by the nodes within
/// `half_width` of the wall, located where `f` crosses the midpoint of the wells.
pub fn localization_fraction<T: Real>(f: &ScalarField1D<T>, w: &DoubleWell<T>, eps: T, half_width: T) -> T {
    let g = f.grid();
    let v = f.values();
    let (a, b) = w.wells();
    let mid = (a + b) / T::lit(2.0);
    let centre = (0..g.cells())
        .find(|&k| (v[k] - mid) * (v[k + 1] - mid) <= T::zero() && v[k] != v[k + 1])
        .map(|k| g.node(k) + g.h() * (mid - v[k]) / (v[k + 1] - v[k]))
        .unwrap_or((g.lo() + g.hi()) / T::lit(2.0));
    let d2 = second_derivative(v, g.h());
    let wts = g.trapezoid_weights();
    let e3 = eps * eps * eps;
    let density = |k: usize| wts[k] * (e3 * d2[k] * d2[k] + w.eval(v[k]) / eps);
    let total = pairwise_sum_by(v.len(), density);
    let inside =
        pairwise_sum_by(v.len(), |k| if (g.node(k) - centre).abs() <= half_width { density(k) } else { T::zero() });
    if total == T::zero() {
        T::one()
    } else {
        inside / total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tanh_profile() -> ScalarField1D<f64> {
        ScalarField1D::sample(Grid1D::new(-4.0, 4.0, 128).unwrap(), |s: f64| s.tanh()).unwrap()
    }

    #[test]
    fn ansatz_is_the_rescaled_profile() {
        let p = tanh_profile();
        let grid = Grid1D::new(0.0, 1.0, 200).unwrap();
        let f = profile_ansatz_1d(&p, 0.125, 0.5, grid).unwrap();
        for (k, &x) in grid.nodes().iter().enumerate() {
            assert_relative_eq!(f.values()[k], p.eval_at((x - 0.5) / 0.125), epsilon = 1e-14);
        }
        let f = profile_ansatz_1d(&p, 0.05, 0.5, grid).unwrap();
        assert_eq!(f.values()[0], p.values()[0]);
        assert_eq!(f.values()[200], p.values()[128]);
        assert!(profile_ansatz_1d(&p, 0.2, 0.5, grid).is_err());
        assert!(profile_ansatz_1d(&p, 0.05, 0.9, grid).is_err());
    }

    #[test]
    fn boundary_ansatz_trace_and_far_field() {
        let c =
            ScalarField1D::sample(Grid1D::new(-2.0, 2.0, 64).unwrap(), |s: f64| 0.5 + 0.5 * (2.0 * s).tanh()).unwrap();
        let grid = Arc::new(Grid2D::rectangle((0.0, 0.0), 1.0, 1.0, 64, 64).unwrap());
        let el = EpsLambda::new(0.05, 8.0).unwrap();
        let rho = el.rho();
        let u = boundary_layer_ansatz_2d(&c, &el, grid.clone(), 0.5, None).unwrap();
        for i in 0..=64 {
            let x = grid.x(i);
            assert_eq!(u.at(i, 0), c.eval_at((x - 0.5) / rho));
        }
        // above the layer the field is the trace continued in y
        assert_eq!(u.at(0, 64), c.values()[0]);
        assert_eq!(u.at(64, 64), c.values()[64]);
        assert_eq!(u.at(64, 32), c.values()[64]);
        let wide = EpsLambda::new(0.5, 0.1).unwrap();
        assert!(boundary_layer_ansatz_2d(&c, &wide, grid, 0.5, None).is_err());
    }

    #[test]
    fn jump_positions() {
        assert_relative_eq!(jump_for_average(0.0, 1.0, -1.0, 1.0, 0.0), 0.5);
        assert_relative_eq!(jump_for_average(0.0, 2.0, 0.0, 1.0, 0.25), 1.5);
        assert_eq!(jump_for_average(0.0, 1.0, 0.0, 1.0, 3.0), 0.0);
    }

    #[test]
    fn config_validation() {
        let w = DoubleWell::quartic(-1.0, 1.0, 1.0).unwrap();
        let dom = SweepDomain::Interval { lo: 0.0, hi: 1.0, n: 64 };
        let mut cfg = SweepConfig::new(1.0, vec![0.1, 0.05], w.clone(), w.clone(), dom);
        assert!(cfg.validate().is_ok());
        assert_relative_eq!(cfg.lambda_for(0.25), 8.0, max_relative = 1e-12);
        cfg.eps_list = vec![0.05, 0.1];
        assert!(cfg.validate().is_err());
        cfg.eps_list = vec![0.1, 0.1];
        assert!(cfg.validate().is_err());
        cfg.eps_list = vec![0.1];
        cfg.mass = Some((0.5, 0.2));
        assert!(cfg.validate().is_err());
        cfg.mass = None;
        cfg.l = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unconstrained_bulk_sweep_relaxes_to_a_well() {
        let w = DoubleWell::quartic(-1.0, 1.0, 1.0).unwrap();
        let mut cfg =
            SweepConfig::new(1.0, vec![0.2, 0.1], w.clone(), w, SweepDomain::Interval { lo: 0.0, hi: 1.0, n: 128 });
        cfg.init = InitKind::LinearInterp;
        let recs = sweep_f1d(&cfg).unwrap();
        assert_eq!(recs.len(), 2);
        for r in &recs {
            assert!(r.min_energy < 1e-6, "{}", r.min_energy);
            assert!(r.min_energy <= r.init_energy);
            assert_eq!(r.min_energy, r.breakdown.total);
        }
    }

    #[test]
    fn forced_bulk_wall_is_localized() {
        let w = DoubleWell::quartic(-1.0, 1.0, 1.0).unwrap();
        let mut cfg = SweepConfig::new(
            1.0,
            vec![0.08, 0.04],
            w.clone(),
            w.clone(),
            SweepDomain::Interval { lo: 0.0, hi: 1.0, n: 256 },
        );
        cfg.mass = Some((-0.2, 0.2));
        let recs = sweep_f1d(&cfg).unwrap();
        for r in &recs {
            assert!(r.converged && r.min_energy <= r.init_energy);
            let f = ScalarField1D::new(Grid1D::new(0.0, 1.0, 256).unwrap(), r.minimizer.clone()).unwrap();
            assert!(localization_fraction(&f, &w, r.eps, 10.0 * r.eps) >= 0.9);
        }
        assert!(plateau(&recs).is_err());
    }

    #[test]
    fn plateau_diagnostics() {
        let rec = |e: f64| SweepRecord {
            eps: e,
            lambda: 1.0,
            l: 1.0,
            min_energy: 1.0 + e,
            breakdown: EnergyBreakdown::new(1.0 + e, 0.0, 0.0, 0.0),
            init_energy: 2.0,
            converged: true,
            iterations: 1,
            grad_norm: 0.0,
            wall_ms: 0,
            warnings: vec![],
            minimizer: vec![],
        };
        let recs: Vec<_> = [0.4, 0.2, 0.1, 0.05].iter().map(|&e| rec(e)).collect();
        let p = plateau(&recs).unwrap();
        assert_relative_eq!(p.value, 1.05);
        assert_relative_eq!(p.last_change, 0.05 / 1.05, max_relative = 1e-12);
        assert_relative_eq!(p.spread, 1.4 / 1.05, max_relative = 1e-12);
        assert!(p.flat);
    }
}
