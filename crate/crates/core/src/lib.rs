//! Discretization, minimization and cross-checks for second-order
//! phase-transition energies with a nonlocal boundary term.
//!
//! Every kernel is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`.

pub mod constants;
pub mod energy;
pub mod error;
pub mod grid;
pub mod lifting;
pub mod linalg;
pub mod optimize;
pub mod potentials;
pub mod scalar;
pub mod scaling;
pub mod sum;

pub use constants::{
    characterize, compute_c_delta, compute_c_over, compute_c_under, compute_m, compute_sigma, cubic_match,
    extend_profile, scale_optimal_value, ConstantKind, EstimateOptions, Side,
};
pub use energy::{
    bending_energy, f_eps, full_energy_2d, g_eps, h12_seminorm, h12_seminorm_fullline, h12_seminorm_of_derivative,
    h32_seminorm, hessian_energy_2d, potential_integral, EpsLambda,
};
pub use error::{Error, Result};
pub use grid::{Edge, Shape};
pub use lifting::{
    average_extension, estimate_zeta, hardy_check, lifting_ratio_explicit, seminorm_comparison_check, LiftMethod,
};
pub use optimize::{minimize, Constraint, MinimizeOptions};
pub use potentials::check_hypotheses;
pub use scalar::Real;
pub use scaling::{sweep_f1d, sweep_full2d, sweep_g1d, InitKind, SweepDomain};

pub type Grid1D = grid::Grid1D<f64>;
pub type Grid2D = grid::Grid2D<f64>;
pub type ScalarField1D = grid::ScalarField1D<f64>;
pub type ScalarField2D = grid::ScalarField2D<f64>;
pub type DoubleWell = potentials::DoubleWell<f64>;
pub type EnergyBreakdown = energy::EnergyBreakdown<f64>;
pub type ConstantEstimate = constants::ConstantEstimate<f64>;
pub type LiftReport = lifting::LiftReport<f64>;
pub type SweepConfig = scaling::SweepConfig<f64>;
pub type SweepRecord = scaling::SweepRecord<f64>;
pub type OptimizeResult = optimize::OptimizeResult<f64>;
