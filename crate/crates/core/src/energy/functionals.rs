//! Assembled functionals: the bulk and boundary 1-D energies and the full 2-D energy.

use serde::Serialize;

use super::fractional::{CellMap, H12Form};
use super::hessian::hessian_energy_2d;
use super::local::{bending_energy, potential_integral};
use crate::error::{Error, Result};
use crate::grid::{Edge, ScalarField1D, ScalarField2D, Shape};
use crate::potentials::DoubleWell;
use crate::scalar::Real;
use crate::sum::pairwise_sum_by;

/// Term-by-term energy values.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EnergyBreakdown<T> {
    pub bending: T,
    pub potential: T,
    pub fractional: T,
    pub boundary_potential: T,
    pub total: T,
}

impl<T: Real> EnergyBreakdown<T> {
    pub fn new(bending: T, potential: T, fractional: T, boundary_potential: T) -> Self {
        Self {
            bending,
            potential,
            fractional,
            boundary_potential,
            total: bending + potential + fractional + boundary_potential,
        }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn terms(&self) -> [T; 4] {
        [self.bending, self.potential, self.fractional, self.boundary_potential]
    }

    pub fn map<U: Real>(&self, f: impl Fn(T) -> U) -> EnergyBreakdown<U> {
        EnergyBreakdown::new(f(self.bending), f(self.potential), f(self.fractional), f(self.boundary_potential))
    }
}

/// Transition width `ε` and boundary weight `λ`; their coupling `L = ε λ^{2/3}` is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsLambda<T> {
    eps: T,
    lambda: T,
}

impl<T: Real> EpsLambda<T> {
    pub fn new(eps: T, lambda: T) -> Result<Self> {
        if !(eps > T::zero() && eps.is_finite()) || !(lambda > T::zero() && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("need eps > 0 and lambda > 0, got ({eps}, {lambda})")));
        }
        Ok(Self { eps, lambda })
    }

    /// The pair on the curve `ε λ^{2/3} = l`, i.e. `λ = (l/ε)^{3/2}`.
    pub fn on_critical_curve(eps: T, l: T) -> Result<Self> {
        if !(l > T::zero()) {
            return Err(Error::InvalidArgument(format!("need L > 0, got {l}")));
        }
        Self::new(eps, (l / eps).powf(T::lit(1.5)))
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    #[allow(non_snake_case)]
    pub fn L(&self) -> T {
        self.eps * self.lambda.powf(T::lit(2.0 / 3.0))
    }

    /// Boundary-layer length `ρ = ε λ^{−1/3}`.
    pub fn rho(&self) -> T {
        self.eps * self.lambda.powf(T::lit(-1.0 / 3.0))
    }
}

/// `ε³ ∫|f″|² + (1/ε) ∫ W(f)`.
pub fn f_eps<T: Real>(f: &ScalarField1D<T>, w: &DoubleWell<T>, eps: T) -> Result<EnergyBreakdown<T>> {
    if !(eps > T::zero()) {
        return Err(Error::InvalidArgument(format!("need eps > 0, got {eps}")));
    }
    Ok(EnergyBreakdown::new(eps * eps * eps * bending_energy(f), potential_integral(f, w) / eps, T::zero(), T::zero()))
}

/// `(ε³/8) |v′|²_{H^{1/2}} + λ ∫ V(v)`.
pub fn g_eps<T: Real>(v: &ScalarField1D<T>, potential: &DoubleWell<T>, el: &EpsLambda<T>) -> EnergyBreakdown<T> {
    let e = el.eps();
    let form = H12Form { map: CellMap::Derivative, full_line: false };
    EnergyBreakdown::new(
        T::zero(),
        T::zero(),
        e * e * e / T::lit(8.0) * form.value(v.values(), v.grid().h()),
        el.lambda() * potential_integral(v, potential),
    )
}

/// `ε³ ∬|D²u|² + (1/ε) ∬ W(u) + λ ∫_edge V(u)` on a rectangle.
pub fn full_energy_2d<T: Real>(
    u: &ScalarField2D<T>,
    bulk: &DoubleWell<T>,
    boundary: &DoubleWell<T>,
    el: &EpsLambda<T>,
    boundary_edge: Edge,
) -> Result<EnergyBreakdown<T>> {
    let grid = u.grid();
    if !matches!(grid.shape(), Shape::Rectangle { .. }) {
        return Err(Error::InvalidGrid("the full energy is defined on rectangles".into()));
    }
    let e = el.eps();
    let w = grid.weights();
    let vals = u.values();
    let bulk_integral = pairwise_sum_by(w.len(), |k| w[k] * bulk.eval(vals[k]));
    let trace = u.trace(boundary_edge)?;
    Ok(EnergyBreakdown::new(
        e * e * e * hessian_energy_2d(u)?,
        bulk_integral / e,
        T::zero(),
        el.lambda() * potential_integral(&trace, boundary),
    ))
}
