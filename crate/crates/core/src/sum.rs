//! Deterministic pairwise (cascade) summation.
//!
//! Every reduction in the energy kernels goes through these helpers so that the
//! grouping of floating-point additions depends only on the number of terms,
//! never on thread scheduling.

use crate::scalar::Real;

const LEAF: usize = 32;

/// Pairwise sum of a slice.
pub fn pairwise_sum<T: Real>(values: &[T]) -> T {
    if values.len() <= LEAF {
        let mut acc = T::zero();
        for &v in values {
            acc = acc + v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise sum of `term(i)` for `i` in `0..n` without materializing the terms.
pub fn pairwise_sum_by<T: Real, F: Fn(usize) -> T>(n: usize, term: F) -> T {
    fn rec<T: Real, F: Fn(usize) -> T>(lo: usize, hi: usize, term: &F) -> T {
        if hi - lo <= LEAF {
            let mut acc = T::zero();
            for i in lo..hi {
                acc = acc + term(i);
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        rec(lo, mid, term) + rec(mid, hi, term)
    }
    rec(0, n, &term)
}

/// Dot product with pairwise accumulation.
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    pairwise_sum_by(a.len(), |i| a[i] * b[i])
}

/// Maximum absolute entry; zero for an empty slice.
pub fn max_abs<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
}
