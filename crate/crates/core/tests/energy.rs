use std::sync::Arc;

use phasewall::constants::compute_m_with;
use phasewall::{
    average_extension, compute_c_under, f_eps, g_eps, h12_seminorm_fullline, h12_seminorm_of_derivative,
    hessian_energy_2d, DoubleWell, EpsLambda, EstimateOptions, Grid1D, Grid2D, ScalarField1D,
};

fn clamped_step(lo: f64, hi: f64, n: usize) -> ScalarField1D {
    let g = Grid1D::new(lo, hi, n).unwrap();
    ScalarField1D::sample(g, |x| 0.5 * (1.0 + (5.0 * x.clamp(-3.0, 3.0)).tanh())).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn full_line_value_matches_wider_domains() {
    let narrow = h12_seminorm_fullline(&clamped_step(-3.0, 3.0, 512)).unwrap();
    let wide = h12_seminorm_fullline(&clamped_step(-12.0, 12.0, 2048)).unwrap();
    assert!(rel(narrow, wide) < 1e-3, "{narrow} vs {wide}");

    // Truncated domains miss tails that decay like 1/R.
    let gap = |r: f64| {
        let n = (512.0 * r / 3.0) as usize;
        narrow - h12_seminorm_of_derivative(&clamped_step(-r, r, n))
    };
    let (g12, g24) = (gap(12.0), gap(24.0));
    assert!(g12 > 0.0 && g24 > 0.0);
    assert!((g12 / g24 - 2.0).abs() < 0.1, "{g12} / {g24}");
}

#[test]
fn averaging_extension_hessian_self_converges() {
    let energy = |n: usize| {
        let g = ScalarField1D::sample(Grid1D::new(0.0, 1.0, n).unwrap(), |t| t * t * (3.0 - 2.0 * t)).unwrap();
        let grid = Arc::new(Grid2D::triangle(1.0, n).unwrap());
        hessian_energy_2d(&average_extension(&g, grid).unwrap()).unwrap()
    };
    let (coarse, fine) = (energy(256), energy(512));
    assert!(rel(coarse, fine) < 1e-2, "{coarse} vs {fine}");
}

#[test]
fn rescaled_boundary_profile_costs_c_under_times_l() {
    let v = DoubleWell::quartic(0.0, 1.0, 1.0).unwrap();
    let est = compute_c_under(&v, 1.0, 256).unwrap();
    let (l, eps): (f64, f64) = (1.0, 1e-2);
    let el = EpsLambda::new(eps, (l / eps).powf(1.5)).unwrap();
    let rho = el.rho();
    let half = est.r * rho;
    let scaled = est.profile.relabeled(0.5 - half, 0.5 + half).unwrap();
    let g = g_eps(&scaled, &v, &el);
    assert!(rel(g.total, est.value * l) < 0.1, "{} vs {}", g.total, est.value * l);
}

#[test]
fn f_eps_of_the_optimal_interior_profile_is_m() {
    let w = DoubleWell::quartic(-1.0, 1.0, 1.0).unwrap();
    let opts = EstimateOptions { richardson: false, ..EstimateOptions::default() };
    let est = compute_m_with(&w, 5.0, 512, &opts).unwrap();
    let b = f_eps(&est.profile, &w, 1.0).unwrap();
    assert!((b.total - est.value).abs() < 1e-12, "{} vs {}", b.total, est.value);
    assert!(b.bending > 0.0 && b.potential > 0.0);
}
