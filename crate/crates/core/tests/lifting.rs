//! Lifting ratios under refinement and on random traces, and the inequality
//! checkers on random inputs.

use std::f64::consts::PI;
use std::sync::Arc;

use phasewall::lifting::ZetaSolver;
use phasewall::{
    estimate_zeta, hardy_check, lifting_ratio_explicit, seminorm_comparison_check, Grid1D, Grid2D, ScalarField1D,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn smoothstep(n: usize) -> ScalarField1D {
    ScalarField1D::sample(Grid1D::new(0.0, 1.0, n).unwrap(), |t| t * t * (3.0 - 2.0 * t)).unwrap()
}

fn triangle(n: usize) -> Arc<Grid2D> {
    Arc::new(Grid2D::triangle(1.0, n).unwrap())
}

fn random_trace(rng: &mut ChaCha8Rng, n: usize) -> ScalarField1D {
    let c: Vec<(f64, f64)> = (0..4).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0 * PI))).collect();
    let a = rng.gen_range(0.3..1.0);
    ScalarField1D::sample(Grid1D::new(0.0, 1.0, n).unwrap(), |x| {
        a * (PI * x).sin()
            + c.iter()
                .enumerate()
                .map(|(k, &(b, p))| b * ((k as f64 + 2.0) * PI * x + p).sin() / (k as f64 + 2.0))
                .sum::<f64>()
    })
    .unwrap()
}

#[test]
fn explicit_ratio_is_bracketed_and_self_converges() {
    let coarse = lifting_ratio_explicit(&smoothstep(256)).unwrap().ratio;
    let fine = lifting_ratio_explicit(&smoothstep(512)).unwrap().ratio;
    assert!((0.105..=0.4575).contains(&coarse), "{coarse}");
    assert!((coarse - fine).abs() < 1e-2, "{coarse} vs {fine}");
}

#[test]
fn zeta_is_stable_under_refinement() {
    let coarse = estimate_zeta(&smoothstep(128), triangle(128), 1e-10).unwrap().ratio;
    let fine = estimate_zeta(&smoothstep(256), triangle(256), 1e-10).unwrap().ratio;
    assert!((coarse - fine).abs() < 2e-2, "{coarse} vs {fine}");
}

#[test]
fn zeta_stays_above_the_lower_bound_on_random_traces() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let solver = ZetaSolver::new(triangle(128)).unwrap();
    for _ in 0..10 {
        let g = random_trace(&mut rng, 128);
        let zeta = solver.solve(&g, 1e-10).unwrap().ratio;
        let explicit = lifting_ratio_explicit(&g).unwrap().ratio;
        assert!(zeta >= 0.095, "{zeta}");
        assert!(zeta <= explicit + 1e-9, "{zeta} > {explicit}");
    }
}

#[test]
fn hardy_holds_on_random_nonnegative_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = Grid1D::new(0.0, 1.0, 256).unwrap();
    for _ in 0..50 {
        let (d, a, k) = (rng.gen_range(0.0..0.3), rng.gen_range(-0.9..0.9), rng.gen_range(1.0..5.0));
        let u =
            ScalarField1D::sample(g, |x: f64| (x - d).max(0.0).powi(2) * (1.0 + a * (k * x).cos()).powi(2)).unwrap();
        for r in [1.5, 2.0, 3.0] {
            let c = hardy_check(&u, r, 1e-3).unwrap();
            assert!(c.pass, "r={r}: {} > {}", c.lhs, c.rhs);
        }
    }
}

#[test]
fn seminorm_comparison_holds_on_random_smooth_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = Grid1D::new(0.0, 1.0, 256).unwrap();
    for _ in 0..50 {
        let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u = ScalarField1D::sample(g, |x: f64| {
            c.iter().enumerate().map(|(k, a)| a * ((k as f64 + 1.0) * x).sin() / (k as f64 + 1.0).powi(2)).sum()
        })
        .unwrap();
        let scale = phasewall::h12_seminorm_of_derivative(&u).sqrt();
        let unit = u.with_values(u.values().iter().map(|v| v / scale).collect()).unwrap();
        let check = seminorm_comparison_check(&unit, 5e-2).unwrap();
        assert!(check.pass, "{} > {}", check.lhs, check.rhs);
    }
}
