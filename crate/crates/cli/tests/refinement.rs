//! Refinement and monotonicity claims for the boundary-wall constants.
//!
//! The admissible class behind `c̲` contains profiles whose derivative has an
//! arbitrarily small `H^{1/2}` seminorm on the interval, so the discrete
//! estimates keep drifting as the grid is refined. These tests assert the
//! expected stability and monotonicity and print the measured values.

use phasewall::constants::compute_c_delta_with;
use phasewall::{compute_c_delta, compute_c_under, DoubleWell, EstimateOptions};

fn boundary_well() -> DoubleWell {
    DoubleWell::quartic(0.0, 1.0, 1.0).unwrap()
}

#[test]
fn c_under_is_stable_under_grid_refinement() {
    let v = boundary_well();
    let coarse = compute_c_under(&v, 1.0, 256).unwrap().value;
    let fine = compute_c_under(&v, 1.0, 512).unwrap().value;
    let rel = (coarse - fine).abs() / fine;
    println!("c_under: n=256 {coarse:.6}, n=512 {fine:.6}, relative change {rel:.4}");
    assert!(rel < 0.02, "c_under moved by {rel:.4} between n=256 and n=512 ({coarse} vs {fine})");
}

#[test]
fn c_delta_does_not_increase_with_delta() {
    let v = boundary_well();
    let values: Vec<f64> = [0.05, 0.1, 0.2].iter().map(|&d| compute_c_delta(&v, d, 1.0, 256).unwrap().value).collect();
    println!("c_delta at delta 0.05, 0.1, 0.2: {values:?}");
    assert!(values.windows(2).all(|p| p[1] <= p[0] + 1e-6), "{values:?}");
}

#[test]
fn c_delta_range_audit_is_reported() {
    let v = boundary_well();
    let opts = EstimateOptions { richardson: false, ..EstimateOptions::default() };
    for d in [0.05, 0.1, 0.2] {
        let audit = compute_c_delta_with(&v, d, 1.0, 256, &opts).unwrap().audit.unwrap();
        println!("c_delta delta={d}: range [{:.4}, {:.4}], within {}", audit.min, audit.max, audit.within);
        assert!(audit.min <= d + 1e-12 && audit.max >= 1.0 - d - 1e-12);
    }
}
