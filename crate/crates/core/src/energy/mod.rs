//! Discrete energies: local terms, fractional seminorms, the 2-D Hessian energy
//! and the assembled functionals.

pub mod fractional;
pub mod functionals;
pub mod hessian;
pub mod local;

pub use fractional::{h12_seminorm, h12_seminorm_fullline, h12_seminorm_of_derivative, h32_seminorm, CellMap, H12Form};
pub use functionals::{f_eps, full_energy_2d, g_eps, EnergyBreakdown, EpsLambda};
pub use hessian::{hessian_energy_2d, HessianComponents, HessianOperator};
pub use local::{bending_energy, potential_integral, second_derivative};
