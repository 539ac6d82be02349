//! Local 1-D energy terms: bending `∫|f″|²` and potential integrals.

use crate::grid::ScalarField1D;
use crate::potentials::DoubleWell;
use crate::scalar::Real;
use crate::sum::pairwise_sum_by;

/// Nodal second derivative: centered in the interior, second-order one-sided at the ends.
pub fn second_derivative<T: Real>(values: &[T], h: T) -> Vec<T> {
    let n = values.len() - 1;
    let h2 = h * h;
    let mut out = vec![T::zero(); n + 1];
    for (i, o) in out.iter_mut().enumerate() {
        *o = second_derivative_stencil(i, n).iter().fold(T::zero(), |acc, &(k, c)| acc + T::lit(c) * values[k]) / h2;
    }
    out
}

/// Stencil `(node, coefficient · h²)` of the nodal second derivative at node `i` of `n` cells.
pub(crate) fn second_derivative_stencil(i: usize, n: usize) -> [(usize, f64); 4] {
    if i == 0 {
        [(0, 2.0), (1, -5.0), (2, 4.0), (3, -1.0)]
    } else if i == n {
        [(n, 2.0), (n - 1, -5.0), (n - 2, 4.0), (n - 3, -1.0)]
    } else {
        [(i - 1, 1.0), (i, -2.0), (i + 1, 1.0), (i, 0.0)]
    }
}

/// Trapezoid rule of `|f″|²`.
pub fn bending_energy<T: Real>(f: &ScalarField1D<T>) -> T {
    let g = f.grid();
    let d2 = second_derivative(f.values(), g.h());
    let w = g.trapezoid_weights();
    pairwise_sum_by(d2.len(), |i| w[i] * d2[i] * d2[i])
}

/// Adds `coef · ∂/∂f [Σ w_i (D2 f)_i²]` into `grad`.
pub(crate) fn bending_gradient<T: Real>(values: &[T], h: T, coef: T, grad: &mut [T]) {
    let n = values.len() - 1;
    let d2 = second_derivative(values, h);
    let h2 = h * h;
    for i in 0..=n {
        let w = if i == 0 || i == n { h / T::lit(2.0) } else { h };
        let factor = T::lit(2.0) * coef * w * d2[i] / h2;
        for (k, c) in second_derivative_stencil(i, n) {
            grad[k] = grad[k] + factor * T::lit(c);
        }
    }
}

/// Trapezoid rule of `w ∘ f`.
pub fn potential_integral<T: Real>(f: &ScalarField1D<T>, w: &DoubleWell<T>) -> T {
    let weights = f.grid().trapezoid_weights();
    let v = f.values();
    pairwise_sum_by(v.len(), |i| weights[i] * w.eval(v[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use approx::assert_relative_eq;

    #[test]
    fn bending_of_linear_and_quadratic() {
        let g = Grid1D::<f64>::new(0.0, 1.0, 7).unwrap();
        let lin = ScalarField1D::sample(g, |x| 3.0 * x - 1.0).unwrap();
        assert!(bending_energy(&lin).abs() < 1e-18);
        for n in [4, 5, 16, 33] {
            let g = Grid1D::new(0.0, 1.0, n).unwrap();
            let q = ScalarField1D::sample(g, |x| 0.5 * x * x).unwrap();
            assert_relative_eq!(bending_energy(&q), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn bending_of_sine_converges_at_second_order() {
        let err = |n: usize| {
            let g = Grid1D::new(0.0, std::f64::consts::PI, n).unwrap();
            let f = ScalarField1D::sample(g, f64::sin).unwrap();
            (bending_energy(&f) - std::f64::consts::FRAC_PI_2).abs() / std::f64::consts::FRAC_PI_2
        };
        assert!(err(512) < 1e-4);
        let order = (err(128) / err(256)).log2();
        assert!(order > 1.8, "observed order {order}");
    }

    #[test]
    fn potential_integrals() {
        let g = Grid1D::new(0.0, 1.0, 1024).unwrap();
        let x = ScalarField1D::sample(g, |x| x).unwrap();
        let w01 = DoubleWell::quartic(0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(potential_integral(&x, &w01), 1.0 / 30.0, epsilon = 1e-6);
        let w11 = DoubleWell::quartic(-1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(potential_integral(&x, &w11), 8.0 / 15.0, epsilon = 1e-5);
        let at_well = ScalarField1D::constant(g, -1.0);
        assert_eq!(potential_integral(&at_well, &w11), 0.0);
    }

    #[test]
    fn bending_gradient_matches_finite_differences() {
        let g = Grid1D::<f64>::new(-1.0, 2.0, 12).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|x| (2.0 * x).sin() + x * x * x).collect();
        let mut grad = vec![0.0; f.len()];
        bending_gradient(&f, g.h(), 1.0, &mut grad);
        let e = |v: &[f64]| bending_energy(&ScalarField1D::new(g, v.to_vec()).unwrap());
        for k in 0..f.len() {
            let mut p = f.clone();
            let mut m = f.clone();
            let d = 1e-6;
            p[k] += d;
            m[k] -= d;
            let fd = (e(&p) - e(&m)) / (2.0 * d);
            assert!((fd - grad[k]).abs() < 1e-5 * grad[k].abs().max(1.0), "node {k}: {fd} vs {}", grad[k]);
        }
    }
}
