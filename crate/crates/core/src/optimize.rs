//! Constrained minimization of the discrete energies.
//!
//! The solver is limited-memory BFGS with Armijo backtracking (sufficient
//! decrease `1e-4`, step halving). Constraints are linear: frozen Dirichlet
//! nodes and weighted-average (mass) equalities. Search directions are kept
//! inside the constraint subspace by zeroing frozen entries and removing the
//! components along the mass vectors, so every iterate stays feasible.
//!
//! When an objective exposes a curvature model (its quadratic part plus the
//! potential curvature at the wells) the model's inverse, sandwiched between
//! projections, is used as the initial inverse Hessian of the quasi-Newton
//! update.
//!
//! Energy differences along the search line are computed by
//! [`Objective::change_along`], which avoids the cancellation of subtracting
//! two large totals. The recorded history is the running sum of these
//! differences and is non-increasing by construction.

use crate::energy::fractional::H12Form;
use crate::energy::local::{bending_gradient, second_derivative, second_derivative_stencil};
use crate::energy::{EnergyBreakdown, HessianOperator};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::linalg::{CsrMatrix, SkylineCholesky};
use crate::potentials::DoubleWell;
use crate::scalar::Real;
use crate::sum::{dot, max_abs, pairwise_sum_by};

/// Linear constraint on the unknowns.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint<T> {
    /// Nodes held at fixed values.
    DirichletNodes { nodes: Vec<(usize, T)> },
    /// `Σ wᵢ xᵢ / Σ wᵢ = target`; `band` records the admissible open interval.
    MassAverage { weights: Vec<T>, target: T, band: (T, T) },
}

impl<T: Real> Constraint<T> {
    /// Mass constraint at the midpoint of `band`.
    pub fn mass_midpoint(weights: Vec<T>, band: (T, T)) -> Result<Self> {
        if !(band.0 < band.1) {
            return Err(Error::InvalidArgument("mass band must satisfy lo < hi".into()));
        }
        Ok(Constraint::MassAverage { weights, target: (band.0 + band.1) / T::lit(2.0), band })
    }

    /// Two frozen nodes at each end of a 1-D grid with `nodes` points.
    pub fn clamp_ends(nodes: usize, left: T, right: T) -> Self {
        Constraint::DirichletNodes { nodes: vec![(0, left), (1, left), (nodes - 2, right), (nodes - 1, right)] }
    }
}

/// Approximate Hessian used to precondition the quasi-Newton iteration.
#[derive(Debug, Clone)]
pub enum CurvatureModel<T> {
    Sparse(CsrMatrix<T>),
    Dense { n: usize, data: Vec<T> },
}

/// Smooth energy of a flat vector of unknowns.
pub trait Objective<T: Real>: Sync {
    fn dim(&self) -> usize;

    fn breakdown(&self, x: &[T]) -> EnergyBreakdown<T>;

    fn value(&self, x: &[T]) -> T {
        self.breakdown(x).total
    }

    fn gradient(&self, x: &[T]) -> Vec<T>;

    /// `α ↦ E(x + α d) − E(x)`.
    fn change_along<'a>(&'a self, x: &'a [T], d: &'a [T]) -> Box<dyn Fn(T) -> T + 'a> {
        let base = self.value(x);
        Box::new(move |alpha| {
            let y: Vec<T> = x.iter().zip(d).map(|(&a, &b)| a + alpha * b).collect();
            self.value(&y) - base
        })
    }

    fn curvature_model(&self) -> Option<CurvatureModel<T>> {
        None
    }
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions<T> {
    /// Stop when the max-norm of the projected gradient is at most `tol`.
    pub tol: T,
    pub max_iter: usize,
    /// Number of stored curvature pairs.
    pub memory: usize,
    /// Use the objective's curvature model when available.
    pub precondition: bool,
}

impl<T: Real> Default for MinimizeOptions<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-8), max_iter: 20_000, memory: 12, precondition: true }
    }
}

/// Outcome of [`minimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult<T> {
    pub x: Vec<T>,
    /// Re-evaluated at `x`.
    pub breakdown: EnergyBreakdown<T>,
    pub iterations: usize,
    /// Max-norm of the projected gradient at `x`.
    pub grad_norm: T,
    pub converged: bool,
    /// Energy after each accepted step, starting with the initial energy.
    pub history: Vec<T>,
}

/// Feasible set of a constraint list, prepared for projections.
struct Feasible<T> {
    frozen: Vec<bool>,
    /// Orthonormal basis of the mass directions restricted to free nodes.
    basis: Vec<Vec<T>>,
}

impl<T: Real> Feasible<T> {
    fn new(dim: usize, constraints: &[Constraint<T>]) -> Result<Self> {
        let mut frozen = vec![false; dim];
        for c in constraints {
            if let Constraint::DirichletNodes { nodes } = c {
                for &(i, v) in nodes {
                    if i >= dim || !v.is_finite() {
                        return Err(Error::InvalidArgument(format!("bad Dirichlet node ({i}, {v})")));
                    }
                    frozen[i] = true;
                }
            }
        }
        let mut basis: Vec<Vec<T>> = Vec::new();
        for c in constraints {
            if let Constraint::MassAverage { weights, target, band } = c {
                if weights.len() != dim {
                    return Err(Error::InvalidArgument("mass weights have the wrong length".into()));
                }
                if !(band.0 < *target && *target < band.1) {
                    return Err(Error::InvalidArgument(format!(
                        "mass target {target} is not inside the band ({}, {})",
                        band.0, band.1
                    )));
                }
                let mut v: Vec<T> = weights.iter().zip(&frozen).map(|(&w, &f)| if f { T::zero() } else { w }).collect();
                for q in &basis {
                    let p = dot(&v, q);
                    for (a, &b) in v.iter_mut().zip(q) {
                        *a = *a - p * b;
                    }
                }
                let norm = dot(&v, &v).sqrt();
                if !(norm > T::zero()) {
                    return Err(Error::InvalidArgument(
                        "mass constraints are dependent or act on frozen nodes only".into(),
                    ));
                }
                basis.push(v.iter().map(|&a| a / norm).collect());
            }
        }
        Ok(Self { frozen, basis })
    }

    fn project(&self, v: &mut [T]) {
        for (a, &f) in v.iter_mut().zip(&self.frozen) {
            if f {
                *a = T::zero();
            }
        }
        for q in &self.basis {
            let p = dot(v, q);
            for (a, &b) in v.iter_mut().zip(q) {
                *a = *a - p * b;
            }
        }
        for (a, &f) in v.iter_mut().zip(&self.frozen) {
            if f {
                *a = T::zero();
            }
        }
    }
}

/// Moves `x` onto the constraint set: frozen nodes are overwritten with their
/// values, then free nodes are shifted along the mass vectors.
pub fn make_feasible<T: Real>(x: &mut [T], constraints: &[Constraint<T>]) -> Result<()> {
    for c in constraints {
        if let Constraint::DirichletNodes { nodes } = c {
            for &(i, v) in nodes {
                x[i] = v;
            }
        }
    }
    let feasible = Feasible::new(x.len(), constraints)?;
    let masses: Vec<(&Vec<T>, T)> = constraints
        .iter()
        .filter_map(|c| match c {
            Constraint::MassAverage { weights, target, .. } => Some((weights, *target)),
            _ => None,
        })
        .collect();
    // Solve G t = r for the shift x += Σ t_k a_k, with a_k the free-node weights.
    let free: Vec<Vec<T>> = masses
        .iter()
        .map(|(w, _)| w.iter().zip(&feasible.frozen).map(|(&a, &f)| if f { T::zero() } else { a }).collect())
        .collect();
    let k = masses.len();
    if k == 0 {
        return Ok(());
    }
    let mut g = vec![T::zero(); k * k];
    let mut r = vec![T::zero(); k];
    for a in 0..k {
        let (w, target) = masses[a];
        let total: T = crate::sum::pairwise_sum(w);
        r[a] = target * total - dot(w, x);
        for b in 0..k {
            g[a * k + b] = dot(&free[a], masses[b].0);
        }
    }
    let t = solve_small(k, &mut g, &mut r)?;
    for a in 0..k {
        for (xi, &fa) in x.iter_mut().zip(&free[a]) {
            *xi = *xi + t[a] * fa;
        }
    }
    Ok(())
}

fn solve_small<T: Real>(k: usize, g: &mut [T], r: &mut [T]) -> Result<Vec<T>> {
    for p in 0..k {
        let piv = (p..k).max_by(|&a, &b| g[a * k + p].abs().partial_cmp(&g[b * k + p].abs()).unwrap()).unwrap_or(p);
        if g[piv * k + p] == T::zero() {
            return Err(Error::InvalidArgument("mass constraints are linearly dependent".into()));
        }
        if piv != p {
            for c in 0..k {
                g.swap(p * k + c, piv * k + c);
            }
            r.swap(p, piv);
        }
        for row in p + 1..k {
            let f = g[row * k + p] / g[p * k + p];
            for c in p..k {
                g[row * k + c] = g[row * k + c] - f * g[p * k + c];
            }
            r[row] = r[row] - f * r[p];
        }
    }
    let mut t = vec![T::zero(); k];
    for p in (0..k).rev() {
        let mut s = r[p];
        for c in p + 1..k {
            s = s - g[p * k + c] * t[c];
        }
        t[p] = s / g[p * k + p];
    }
    Ok(t)
}

/// Gradient with frozen entries set to zero.
pub fn gradient<T: Real, O: Objective<T> + ?Sized>(obj: &O, x: &[T], constraints: &[Constraint<T>]) -> Result<Vec<T>> {
    let feasible = Feasible::new(x.len(), constraints)?;
    let mut g = obj.gradient(x);
    for (a, &f) in g.iter_mut().zip(&feasible.frozen) {
        if f {
            *a = T::zero();
        }
    }
    Ok(g)
}

/// Gradient projected onto the constraint subspace.
pub fn projected_gradient<T: Real, O: Objective<T> + ?Sized>(
    obj: &O,
    x: &[T],
    constraints: &[Constraint<T>],
) -> Result<Vec<T>> {
    let feasible = Feasible::new(x.len(), constraints)?;
    let mut g = obj.gradient(x);
    feasible.project(&mut g);
    Ok(g)
}

enum Preconditioner<T> {
    Identity,
    Factor { factor: SkylineCholesky<T>, free: Vec<usize> },
}

impl<T: Real> Preconditioner<T> {
    fn build(model: Option<CurvatureModel<T>>, frozen: &[bool]) -> Result<Self> {
        let free: Vec<usize> = (0..frozen.len()).filter(|&i| !frozen[i]).collect();
        let factor = match model {
            None => return Ok(Preconditioner::Identity),
            Some(CurvatureModel::Sparse(m)) => SkylineCholesky::from_csr(&m.submatrix(&free))?,
            Some(CurvatureModel::Dense { n, data }) => {
                let k = free.len();
                let mut sub = vec![T::zero(); k * k];
                for (a, &i) in free.iter().enumerate() {
                    for (b, &j) in free.iter().enumerate() {
                        sub[a * k + b] = data[i * n + j];
                    }
                }
                SkylineCholesky::from_dense(k, &sub)?
            }
        };
        Ok(Preconditioner::Factor { factor, free })
    }

    fn apply(&self, feasible: &Feasible<T>, r: &[T]) -> Vec<T> {
        let mut v = r.to_vec();
        feasible.project(&mut v);
        if let Preconditioner::Factor { factor, free } = self {
            let rhs: Vec<T> = free.iter().map(|&i| v[i]).collect();
            let sol = factor.solve(&rhs);
            v.iter_mut().for_each(|a| *a = T::zero());
            for (&i, s) in free.iter().zip(sol) {
                v[i] = s;
            }
            feasible.project(&mut v);
        }
        v
    }

    fn is_identity(&self) -> bool {
        matches!(self, Preconditioner::Identity)
    }
}

/// Minimizes `obj` from `init` subject to `constraints`.
pub fn minimize<T: Real, O: Objective<T> + ?Sized>(
    obj: &O,
    init: Vec<T>,
    constraints: &[Constraint<T>],
    opts: &MinimizeOptions<T>,
) -> Result<OptimizeResult<T>> {
    if !(opts.tol > T::zero()) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    if init.len() != obj.dim() {
        return Err(Error::InvalidArgument(format!("init has {} entries, objective needs {}", init.len(), obj.dim())));
    }
    let mut x = init;
    make_feasible(&mut x, constraints)?;
    let feasible = Feasible::new(x.len(), constraints)?;
    let precond = if opts.precondition {
        Preconditioner::build(obj.curvature_model(), &feasible.frozen)?
    } else {
        Preconditioner::Identity
    };

    let mut energy = obj.value(&x);
    let mut g = obj.gradient(&x);
    if !energy.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { iteration: 0 });
    }
    feasible.project(&mut g);
    let mut history = vec![energy];
    let mut s_mem: Vec<Vec<T>> = Vec::new();
    let mut y_mem: Vec<Vec<T>> = Vec::new();
    let mut iterations = 0;
    let mut grad_norm = max_abs(&g);
    let c1 = T::lit(1e-4);
    let min_step = T::lit(2f64.powi(-60));

    while grad_norm > opts.tol && iterations < opts.max_iter {
        let fresh = s_mem.is_empty();
        let mut d = two_loop(&g, &s_mem, &y_mem, &precond, &feasible);
        let mut slope = dot(&g, &d);
        if !(slope < T::zero()) {
            s_mem.clear();
            y_mem.clear();
            d = precond.apply(&feasible, &g).iter().map(|&v| -v).collect();
            slope = dot(&g, &d);
            if !(slope < T::zero()) {
                break;
            }
        }
        let phi = obj.change_along(&x, &d);
        let mut alpha = if fresh && precond.is_identity() { initial_step(&phi, slope, &d) } else { T::one() };
        let mut accepted = None;
        while alpha >= min_step {
            let change = phi(alpha);
            if change.is_finite() && change <= c1 * alpha * slope && change < T::zero() {
                accepted = Some(change);
                break;
            }
            alpha = alpha / T::lit(2.0);
        }
        drop(phi);
        let Some(change) = accepted else {
            if s_mem.is_empty() {
                break;
            }
            s_mem.clear();
            y_mem.clear();
            continue;
        };
        let step: Vec<T> = d.iter().map(|&v| alpha * v).collect();
        for (a, &b) in x.iter_mut().zip(&step) {
            *a = *a + b;
        }
        energy = energy + change;
        history.push(energy);
        iterations += 1;
        let mut g_new = obj.gradient(&x);
        if g_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { iteration: iterations });
        }
        feasible.project(&mut g_new);
        let yk: Vec<T> = g_new.iter().zip(&g).map(|(&a, &b)| a - b).collect();
        let sy = dot(&step, &yk);
        if sy > T::lit(1e-14) * dot(&step, &step).sqrt() * dot(&yk, &yk).sqrt() && sy > T::zero() {
            if s_mem.len() == opts.memory {
                s_mem.remove(0);
                y_mem.remove(0);
            }
            s_mem.push(step);
            y_mem.push(yk);
        }
        g = g_new;
        grad_norm = max_abs(&g);
    }

    let breakdown = obj.breakdown(&x);
    if !breakdown.total.is_finite() {
        return Err(Error::NonFinite { iteration: iterations });
    }
    Ok(OptimizeResult { converged: grad_norm <= opts.tol, x, breakdown, iterations, grad_norm, history })
}

/// Step from a one-probe curvature estimate along `d`.
fn initial_step<T: Real>(phi: &dyn Fn(T) -> T, slope: T, d: &[T]) -> T {
    let t = (T::one() / max_abs(d)).min(T::one());
    let value = phi(t);
    let curvature = T::lit(2.0) * (value - t * slope) / (t * t);
    if value.is_finite() && curvature > T::zero() {
        (-slope / curvature).min(T::lit(1e6) * t)
    } else {
        t
    }
}

fn two_loop<T: Real>(
    g: &[T],
    s_mem: &[Vec<T>],
    y_mem: &[Vec<T>],
    precond: &Preconditioner<T>,
    feasible: &Feasible<T>,
) -> Vec<T> {
    let m = s_mem.len();
    let mut q = g.to_vec();
    let mut alphas = vec![T::zero(); m];
    let rho: Vec<T> = (0..m).map(|k| T::one() / dot(&y_mem[k], &s_mem[k])).collect();
    for k in (0..m).rev() {
        alphas[k] = rho[k] * dot(&s_mem[k], &q);
        for (a, &b) in q.iter_mut().zip(&y_mem[k]) {
            *a = *a - alphas[k] * b;
        }
    }
    let mut r = if precond.is_identity() {
        let gamma =
            if m > 0 { dot(&s_mem[m - 1], &y_mem[m - 1]) / dot(&y_mem[m - 1], &y_mem[m - 1]) } else { T::one() };
        let mut r = q;
        feasible.project(&mut r);
        r.iter_mut().for_each(|a| *a = *a * gamma);
        r
    } else {
        precond.apply(feasible, &q)
    };
    for k in 0..m {
        let beta = rho[k] * dot(&y_mem[k], &r);
        for (a, &b) in r.iter_mut().zip(&s_mem[k]) {
            *a = *a + (alphas[k] - beta) * b;
        }
    }
    feasible.project(&mut r);
    r.iter_mut().for_each(|a| *a = -*a);
    r
}

/// One-dimensional profile energy:
/// `b ∫|f″|² + c |·|²_{H^{1/2}} + p ∫W(f) + q ∫V(f)`, each term optional.
#[derive(Clone)]
pub struct ProfileEnergy<T> {
    grid: Grid1D<T>,
    bending: T,
    fractional: Option<(H12Form, T)>,
    bulk: Option<(DoubleWell<T>, T)>,
    boundary: Option<(DoubleWell<T>, T)>,
}

impl<T: Real> ProfileEnergy<T> {
    pub fn new(grid: Grid1D<T>) -> Self {
        Self { grid, bending: T::zero(), fractional: None, bulk: None, boundary: None }
    }

    pub fn with_bending(mut self, coef: T) -> Self {
        self.bending = coef;
        self
    }

    pub fn with_fractional(mut self, form: H12Form, coef: T) -> Self {
        self.fractional = Some((form, coef));
        self
    }

    /// Potential term reported in the `potential` slot.
    pub fn with_bulk(mut self, w: DoubleWell<T>, coef: T) -> Self {
        self.bulk = Some((w, coef));
        self
    }

    /// Potential term reported in the `boundary_potential` slot.
    pub fn with_boundary(mut self, v: DoubleWell<T>, coef: T) -> Self {
        self.boundary = Some((v, coef));
        self
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    fn potential_sum(&self, w: &DoubleWell<T>, x: &[T]) -> T {
        let weights = self.grid.trapezoid_weights();
        pairwise_sum_by(x.len(), |i| weights[i] * w.eval(x[i]))
    }

    fn bending_matrix(&self) -> Vec<(usize, usize, T)> {
        let n = self.grid.cells();
        let h = self.grid.h();
        let h4 = h * h * h * h;
        let mut t = Vec::new();
        for i in 0..=n {
            let w = if i == 0 || i == n { h / T::lit(2.0) } else { h };
            let st = second_derivative_stencil(i, n);
            for &(a, ca) in &st {
                for &(b, cb) in &st {
                    t.push((a, b, self.bending * w * T::lit(ca * cb) / h4));
                }
            }
        }
        t
    }
}

impl<T: Real> Objective<T> for ProfileEnergy<T> {
    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn breakdown(&self, x: &[T]) -> EnergyBreakdown<T> {
        let h = self.grid.h();
        let bending = if self.bending != T::zero() {
            let d2 = second_derivative(x, h);
            let w = self.grid.trapezoid_weights();
            self.bending * pairwise_sum_by(d2.len(), |i| w[i] * d2[i] * d2[i])
        } else {
            T::zero()
        };
        let fractional = self.fractional.map_or(T::zero(), |(form, c)| c * form.value(x, h));
        let potential = self.bulk.as_ref().map_or(T::zero(), |(w, c)| *c * self.potential_sum(w, x));
        let boundary = self.boundary.as_ref().map_or(T::zero(), |(v, c)| *c * self.potential_sum(v, x));
        EnergyBreakdown::new(bending, potential, fractional, boundary)
    }

    fn gradient(&self, x: &[T]) -> Vec<T> {
        let h = self.grid.h();
        let mut g = vec![T::zero(); x.len()];
        if self.bending != T::zero() {
            bending_gradient(x, h, self.bending, &mut g);
        }
        if let Some((form, c)) = self.fractional {
            form.gradient_into(x, h, c, &mut g);
        }
        let weights = self.grid.trapezoid_weights();
        for (w, c) in self.bulk.iter().chain(self.boundary.iter()) {
            for i in 0..x.len() {
                g[i] = g[i] + *c * weights[i] * w.deriv(x[i]);
            }
        }
        g
    }

    fn change_along<'a>(&'a self, x: &'a [T], d: &'a [T]) -> Box<dyn Fn(T) -> T + 'a> {
        let h = self.grid.h();
        let two = T::lit(2.0);
        // Quadratic part: α ↦ 2α B(x, d) + α² Q(d).
        let (mut lin, mut quad) = (T::zero(), T::zero());
        if self.bending != T::zero() {
            let (dx, dd) = (second_derivative(x, h), second_derivative(d, h));
            let w = self.grid.trapezoid_weights();
            lin = lin + self.bending * pairwise_sum_by(dx.len(), |i| w[i] * dx[i] * dd[i]);
            quad = quad + self.bending * pairwise_sum_by(dd.len(), |i| w[i] * dd[i] * dd[i]);
        }
        if let Some((form, c)) = self.fractional {
            lin = lin + c * form.bilinear(x, d, h);
            quad = quad + c * form.value(d, h);
        }
        let weights = self.grid.trapezoid_weights();
        Box::new(move |alpha| {
            let mut total = two * alpha * lin + alpha * alpha * quad;
            for (w, c) in self.bulk.iter().chain(self.boundary.iter()) {
                total = total + *c * pairwise_sum_by(x.len(), |i| weights[i] * w.difference(x[i] + alpha * d[i], x[i]));
            }
            total
        })
    }

    fn curvature_model(&self) -> Option<CurvatureModel<T>> {
        let n = self.dim();
        let weights = self.grid.trapezoid_weights();
        let mut diag = vec![T::zero(); n];
        for (w, c) in self.bulk.iter().chain(self.boundary.iter()) {
            let mu = *c * w.well_curvature();
            for i in 0..n {
                diag[i] = diag[i] + mu * weights[i];
            }
        }
        if let Some((form, c)) = self.fractional {
            let mut data = form.hessian(n, self.grid.h());
            data.iter_mut().for_each(|v| *v = *v * c);
            for (a, b, v) in self.bending_matrix() {
                data[a * n + b] = data[a * n + b] + T::lit(2.0) * v;
            }
            for i in 0..n {
                data[i * n + i] = data[i * n + i] + diag[i];
            }
            Some(CurvatureModel::Dense { n, data })
        } else {
            let mut t: Vec<(usize, usize, T)> =
                self.bending_matrix().into_iter().map(|(a, b, v)| (a, b, T::lit(2.0) * v)).collect();
            t.extend((0..n).map(|i| (i, i, diag[i])));
            Some(CurvatureModel::Sparse(CsrMatrix::from_triplets(n, t)))
        }
    }
}

/// Two-dimensional energy on a masked grid:
/// `b ∬|D²u|² + p ∬W(u) + q ∫_edge V(u)`.
#[derive(Clone)]
pub struct FieldEnergy<T> {
    op: HessianOperator<T>,
    bending: T,
    bulk: Option<(DoubleWell<T>, T)>,
    /// Potential, coefficient, edge nodes and their 1-D quadrature weights.
    boundary: Option<(DoubleWell<T>, T, Vec<usize>, Vec<T>)>,
}

impl<T: Real> FieldEnergy<T> {
    pub fn new(op: HessianOperator<T>, bending: T) -> Self {
        Self { op, bending, bulk: None, boundary: None }
    }

    pub fn with_bulk(mut self, w: DoubleWell<T>, coef: T) -> Self {
        self.bulk = Some((w, coef));
        self
    }

    pub fn with_boundary(mut self, v: DoubleWell<T>, coef: T, nodes: Vec<usize>, weights: Vec<T>) -> Self {
        self.boundary = Some((v, coef, nodes, weights));
        self
    }

    pub fn operator(&self) -> &HessianOperator<T> {
        &self.op
    }
}

impl<T: Real> Objective<T> for FieldEnergy<T> {
    fn dim(&self) -> usize {
        self.op.grid().node_count()
    }

    fn breakdown(&self, x: &[T]) -> EnergyBreakdown<T> {
        let bending = self.bending * self.op.energy(x);
        let potential = self.bulk.as_ref().map_or(T::zero(), |(w, c)| {
            let wt = self.op.grid().weights();
            *c * pairwise_sum_by(x.len(), |k| wt[k] * w.eval(x[k]))
        });
        let boundary = self
            .boundary
            .as_ref()
            .map_or(T::zero(), |(v, c, nodes, wt)| *c * pairwise_sum_by(nodes.len(), |k| wt[k] * v.eval(x[nodes[k]])));
        EnergyBreakdown::new(bending, potential, T::zero(), boundary)
    }

    fn gradient(&self, x: &[T]) -> Vec<T> {
        let mut g = vec![T::zero(); x.len()];
        self.op.gradient_into(x, self.bending, &mut g);
        if let Some((w, c)) = &self.bulk {
            let wt = self.op.grid().weights();
            for k in 0..x.len() {
                g[k] = g[k] + *c * wt[k] * w.deriv(x[k]);
            }
        }
        if let Some((v, c, nodes, wt)) = &self.boundary {
            for (k, &i) in nodes.iter().enumerate() {
                g[i] = g[i] + *c * wt[k] * v.deriv(x[i]);
            }
        }
        g
    }

    fn change_along<'a>(&'a self, x: &'a [T], d: &'a [T]) -> Box<dyn Fn(T) -> T + 'a> {
        let lin = self.bending * self.op.bilinear(x, d);
        let quad = self.bending * self.op.energy(d);
        let two = T::lit(2.0);
        Box::new(move |alpha| {
            let mut total = two * alpha * lin + alpha * alpha * quad;
            if let Some((w, c)) = &self.bulk {
                let wt = self.op.grid().weights();
                total = total + *c * pairwise_sum_by(x.len(), |k| wt[k] * w.difference(x[k] + alpha * d[k], x[k]));
            }
            if let Some((v, c, nodes, wt)) = &self.boundary {
                total = total
                    + *c * pairwise_sum_by(nodes.len(), |k| {
                        let i = nodes[k];
                        wt[k] * v.difference(x[i] + alpha * d[i], x[i])
                    });
            }
            total
        })
    }

    fn curvature_model(&self) -> Option<CurvatureModel<T>> {
        let n = self.dim();
        let k = self.op.matrix();
        let mut t: Vec<(usize, usize, T)> = Vec::with_capacity(k.nnz() + n);
        for r in 0..n {
            for (c, v) in k.row(r) {
                t.push((r, c, T::lit(2.0) * self.bending * v));
            }
        }
        let wt = self.op.grid().weights();
        let mut diag = vec![T::zero(); n];
        if let Some((w, c)) = &self.bulk {
            let mu = *c * w.well_curvature();
            for i in 0..n {
                diag[i] = diag[i] + mu * wt[i];
            }
        }
        if let Some((v, c, nodes, ew)) = &self.boundary {
            let mu = *c * v.well_curvature();
            for (kk, &i) in nodes.iter().enumerate() {
                diag[i] = diag[i] + mu * ew[kk];
            }
        }
        for i in 0..n {
            // unmasked lattice nodes carry no energy; keep them decoupled
            let d = if self.op.grid().mask()[i] { diag[i] } else { T::one() };
            t.push((i, i, d));
        }
        Some(CurvatureModel::Sparse(CsrMatrix::from_triplets(n, t)))
    }
}
