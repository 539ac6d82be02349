//! Every energy kernel against its dense reference on small grids.

#[path = "common/oracle.rs"]
mod oracle;

use std::sync::Arc;

use phasewall::{
    bending_energy, f_eps, full_energy_2d, g_eps, h12_seminorm, h12_seminorm_fullline, h12_seminorm_of_derivative,
    h32_seminorm, hessian_energy_2d, potential_integral, DoubleWell, Edge, EpsLambda, Grid1D, Grid2D, ScalarField1D,
    ScalarField2D,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-8;

fn random_field(rng: &mut ChaCha8Rng, lo: f64, hi: f64, n: usize) -> ScalarField1D {
    let a: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let p: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..6.0)).collect();
    let noise: Vec<f64> = (0..=n).map(|_| rng.gen_range(-0.05..0.05)).collect();
    let g = Grid1D::new(lo, hi, n).unwrap();
    let smooth =
        ScalarField1D::sample(g, |x| (0..4).map(|k| a[k] * ((k as f64 + 1.0) * x + p[k]).sin()).sum()).unwrap();
    let v = smooth.values().iter().zip(&noise).map(|(s, e)| s + e).collect();
    smooth.with_values(v).unwrap()
}

fn assert_close(name: &str, fast: f64, slow: f64) {
    let rel = oracle::rel_diff(fast, slow);
    assert!(rel <= TOL, "{name}: kernel {fast:e} vs oracle {slow:e} (relative {rel:e})");
}

#[test]
fn one_dimensional_kernels_match_the_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let w = DoubleWell::quartic(-1.0, 1.0, 1.0).unwrap();
    for n in [4, 7, 16, 33, 64] {
        for _ in 0..3 {
            let f = random_field(&mut rng, -0.7, 1.9, n);
            let (v, h) = (f.values(), f.grid().h());
            assert_close("bending", bending_energy(&f), oracle::bending(v, h));
            assert_close("potential", potential_integral(&f, &w), oracle::potential(v, h, |t| w.eval(t)));
            assert_close("h12", h12_seminorm(&f), oracle::h12(v, h));
            assert_close("h12 of derivative", h12_seminorm_of_derivative(&f), oracle::h12_of_derivative(v, h));
            if n % 2 == 0 {
                assert_close("h32", h32_seminorm(&f).unwrap(), oracle::h32(v, h));
            }
            let eps = rng.gen_range(0.05..1.0);
            let fb = f_eps(&f, &w, eps).unwrap();
            assert_close(
                "f_eps",
                fb.total,
                eps.powi(3) * oracle::bending(v, h) + oracle::potential(v, h, |t| w.eval(t)) / eps,
            );
            let el = EpsLambda::new(eps, rng.gen_range(0.5..20.0)).unwrap();
            let gb = g_eps(&f, &w, &el);
            let expect = eps.powi(3) / 8.0 * oracle::h12_of_derivative(v, h)
                + el.lambda() * oracle::potential(v, h, |t| w.eval(t));
            assert_close("g_eps", gb.total, expect);
        }
    }
}

#[test]
fn full_line_seminorm_matches_the_oracle() {
    for n in [8, 24, 64] {
        let g = Grid1D::new(-4.0, 4.0, n).unwrap();
        let f = ScalarField1D::sample(g, |x| {
            let t = (x / 2.0).clamp(-1.0, 1.0);
            if x.abs() >= 2.0 {
                t.signum()
            } else {
                t * (1.5 - 0.5 * t * t)
            }
        })
        .unwrap();
        assert_close(
            "h12 full line",
            h12_seminorm_fullline(&f).unwrap(),
            oracle::h12_fullline(f.values(), f.grid().h()),
        );
    }
}

#[test]
fn hessian_and_full_energy_match_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let w = DoubleWell::quartic(-1.0, 1.0, 1.0).unwrap();
    let v = DoubleWell::quartic(-0.5, 0.8, 2.0).unwrap();
    for (nx, ny) in [(4, 4), (9, 5), (16, 12), (64, 32)] {
        let grid = Arc::new(Grid2D::rectangle((0.3, -0.2), 1.3, 0.7, nx, ny).unwrap());
        let c: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u = ScalarField2D::sample(grid.clone(), |x, y| {
            c[0] * (2.0 * x + c[1]).sin() * (1.0 + c[2] * y * y) + c[3] * (3.0 * y).cos() + c[4] * x * y
        })
        .unwrap();
        let (xx, xy, yy) = oracle::hessian_rectangle(u.values(), nx, ny, grid.hx(), grid.hy());
        let hess = xx + 2.0 * xy + yy;
        assert_close("hessian", hessian_energy_2d(&u).unwrap(), hess);

        let el = EpsLambda::new(0.2, 7.0).unwrap();
        let b = full_energy_2d(&u, &w, &v, &el, Edge::Bottom).unwrap();
        let bulk: f64 = u.values().iter().zip(grid.weights()).map(|(&t, &q)| q * w.eval(t)).sum();
        let bottom: Vec<f64> = (0..=nx).map(|i| u.values()[i]).collect();
        let expect = 0.008 * hess + bulk / 0.2 + 7.0 * oracle::potential(&bottom, grid.hx(), |t| v.eval(t));
        assert_close("full_energy_2d", b.total, expect);
    }
}

#[test]
fn the_oracle_reproduces_analytic_values() {
    let g = Grid1D::new(0.0, 1.0, 64).unwrap();
    let sq = ScalarField1D::sample(g, |x| x * x).unwrap();
    let h = g.h();
    assert!((oracle::bending(sq.values(), h) - 4.0).abs() < 1e-9);
    assert!((oracle::h32(sq.values(), h) - 0.25).abs() < 2e-2);
    assert!((oracle::h12(sq.values(), h) - 7.0 / 6.0).abs() < 2e-2);
    assert!((oracle::inverse_square_tail(1) - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-15);
}
