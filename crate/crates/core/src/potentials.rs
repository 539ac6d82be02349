//! Double-well potentials and sample-based checks of the growth hypotheses.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Clone)]
enum Form<T> {
    /// `scale · (t − lo)² (t − hi)²`
    Quartic {
        scale: T,
    },
    Custom {
        eval: ScalarFn<T>,
        deriv: ScalarFn<T>,
    },
}

/// A nonnegative potential vanishing at two wells.
#[derive(Clone)]
pub struct DoubleWell<T> {
    well_lo: T,
    well_hi: T,
    form: Form<T>,
}

impl<T: fmt::Display> fmt::Debug for DoubleWell<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            Form::Quartic { scale } => {
                write!(f, "DoubleWell::Quartic {{ wells: ({}, {}), scale: {} }}", self.well_lo, self.well_hi, scale)
            }
            Form::Custom { .. } => {
                write!(f, "DoubleWell::Custom {{ wells: ({}, {}) }}", self.well_lo, self.well_hi)
            }
        }
    }
}

impl<T: Real> DoubleWell<T> {
    /// `scale · (t − lo)² (t − hi)²`.
    pub fn quartic(lo: T, hi: T, scale: T) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidArgument(format!("wells must satisfy lo < hi, got ({lo}, {hi})")));
        }
        if !(scale > T::zero()) || !scale.is_finite() {
            return Err(Error::InvalidArgument(format!("scale must be positive, got {scale}")));
        }
        Ok(Self { well_lo: lo, well_hi: hi, form: Form::Quartic { scale } })
    }

    /// Arbitrary potential given by closures. No hypotheses are enforced;
    /// run [`check_hypotheses`] to audit it.
    pub fn custom<E, D>(lo: T, hi: T, eval: E, deriv: D) -> Self
    where
        E: Fn(T) -> T + Send + Sync + 'static,
        D: Fn(T) -> T + Send + Sync + 'static,
    {
        Self { well_lo: lo, well_hi: hi, form: Form::Custom { eval: Arc::new(eval), deriv: Arc::new(deriv) } }
    }

    pub fn well_lo(&self) -> T {
        self.well_lo
    }

    pub fn well_hi(&self) -> T {
        self.well_hi
    }

    pub fn wells(&self) -> (T, T) {
        (self.well_lo, self.well_hi)
    }

    /// Scale of a quartic well, `None` for custom potentials.
    pub fn scale(&self) -> Option<T> {
        match self.form {
            Form::Quartic { scale } => Some(scale),
            Form::Custom { .. } => None,
        }
    }

    #[inline]
    pub fn eval(&self, t: T) -> T {
        match &self.form {
            Form::Quartic { scale } => {
                let p = (t - self.well_lo) * (t - self.well_hi);
                *scale * p * p
            }
            Form::Custom { eval, .. } => eval(t),
        }
    }

    #[inline]
    pub fn deriv(&self, t: T) -> T {
        match &self.form {
            Form::Quartic { scale } => {
                let p = (t - self.well_lo) * (t - self.well_hi);
                let dp = T::lit(2.0) * t - self.well_lo - self.well_hi;
                T::lit(2.0) * *scale * p * dp
            }
            Form::Custom { deriv, .. } => deriv(t),
        }
    }

    /// Second derivative (finite differences for custom potentials).
    pub fn second_deriv(&self, t: T) -> T {
        match &self.form {
            Form::Quartic { scale } => {
                let p = (t - self.well_lo) * (t - self.well_hi);
                let dp = T::lit(2.0) * t - self.well_lo - self.well_hi;
                T::lit(2.0) * *scale * (dp * dp + T::lit(2.0) * p)
            }
            Form::Custom { deriv, .. } => {
                let d = T::lit(1e-5) * (T::one() + t.abs());
                (deriv(t + d) - deriv(t - d)) / (d + d)
            }
        }
    }

    /// `eval(a) − eval(b)` without cancellation against the magnitude of the values.
    #[inline]
    pub fn difference(&self, a: T, b: T) -> T {
        match &self.form {
            Form::Quartic { scale } => {
                let pa = (a - self.well_lo) * (a - self.well_hi);
                let pb = (b - self.well_lo) * (b - self.well_hi);
                let dp = (a - b) * (a + b - self.well_lo - self.well_hi);
                *scale * dp * (pa + pb)
            }
            Form::Custom { eval, .. } => eval(a) - eval(b),
        }
    }

    /// Curvature at the wells, used to scale preconditioners.
    pub fn well_curvature(&self) -> T {
        self.second_deriv(self.well_lo).max(self.second_deriv(self.well_hi)).max(T::lit(1e-12))
    }
}

/// Outcome of one hypothesis check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisOutcome {
    pub name: &'static str,
    pub pass: bool,
    /// Best constant found by the search, when one exists.
    pub constant: Option<f64>,
    /// Sample points violating the hypothesis.
    pub witnesses: Vec<f64>,
}

/// Per-hypothesis report of [`check_hypotheses`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    /// Zero set is exactly the two wells.
    pub wells: HypothesisOutcome,
    /// Quadratic growth `W(z) ≥ C z² − 1/C`.
    pub growth: HypothesisOutcome,
    /// Quadratic lower bound near each well.
    pub nondegenerate: HypothesisOutcome,
    /// `deriv` matches finite differences of `eval` and is continuous.
    pub smooth: HypothesisOutcome,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.wells.pass && self.growth.pass && self.nondegenerate.pass && self.smooth.pass
    }
}

/// Audits a potential on `samples` points spread over a window ten times the
/// well gap on each side. Constants are searched, not supplied: the largest `C`
/// for the growth bound and the smallest for the near-well bound.
pub fn check_hypotheses<T: Real>(w: &DoubleWell<T>, samples: usize) -> Result<HypothesisReport> {
    if samples < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 samples, got {samples}")));
    }
    let (a, b) = (w.well_lo().to_f64_lossy(), w.well_hi().to_f64_lossy());
    let gap = b - a;
    let reach = 10.0 * gap.max(a.abs()).max(b.abs()).max(1.0);
    let (lo, hi) = (a - reach, b + reach);
    let mut pts: Vec<f64> = (0..samples).map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let ev = |t: f64| w.eval(T::lit(t)).to_f64_lossy();
    let dv = |t: f64| w.deriv(T::lit(t)).to_f64_lossy();
    let scale = pts.iter().map(|&t| ev(t).abs()).fold(0.0, f64::max).max(1e-300);
    let zero_tol = 1e-12 * scale;

    // zero set
    let mut witnesses = Vec::new();
    for &t in &pts {
        let v = ev(t);
        let at_well = t == a || t == b;
        if v < -zero_tol || (at_well && v.abs() > zero_tol) || (!at_well && v <= zero_tol) {
            witnesses.push(t);
        }
    }
    let wells = HypothesisOutcome { name: "wells", pass: witnesses.is_empty(), constant: None, witnesses };

    // growth: C z² − 1/C ≤ W(z)  ⇔  C ≤ (W + sqrt(W² + 4 z²)) / (2 z²)
    let mut c_best = f64::INFINITY;
    for &t in &pts {
        if t != 0.0 {
            let v = ev(t).max(0.0);
            c_best = c_best.min((v + (v * v + 4.0 * t * t).sqrt()) / (2.0 * t * t));
        }
    }
    // C = 1/reach is what the zero function achieves on this window; demand real growth.
    let trivial = 1.0 / (hi.abs().max(lo.abs()));
    let growth_pass = c_best.is_finite() && c_best > 1.5 * trivial;
    let growth = HypothesisOutcome {
        name: "growth",
        pass: growth_pass,
        constant: c_best.is_finite().then_some(c_best),
        witnesses: if growth_pass { vec![] } else { vec![if hi.abs() > lo.abs() { hi } else { lo }] },
    };

    // near-well bound on (well ± rho), rho = gap/4: C ≥ dist² / V. A genuine
    // quadratic bound keeps the constant found within rho/10 of the wells
    // comparable to the one found farther out; a degenerate zero makes it blow up.
    let rho = gap / 4.0;
    let (mut c_inner, mut c_outer): (f64, f64) = (0.0, 0.0);
    let mut near_witnesses = Vec::new();
    let mut worst_inner = a;
    let near_pts = 4 * samples;
    for k in 0..=near_pts {
        let s = -rho + 2.0 * rho * k as f64 / near_pts as f64;
        for &well in &[a, b] {
            let t = well + s;
            let dist = (t - a).abs().min((t - b).abs());
            if dist == 0.0 {
                continue;
            }
            let v = ev(t);
            if v <= 0.0 {
                near_witnesses.push(t);
            } else if dist <= rho / 10.0 {
                let c = dist * dist / v;
                if c > c_inner {
                    c_inner = c;
                    worst_inner = t;
                }
            } else {
                c_outer = c_outer.max(dist * dist / v);
            }
        }
    }
    if near_witnesses.is_empty() && !(c_inner <= 10.0 * c_outer) {
        near_witnesses.push(worst_inner);
    }
    let c_near = c_inner.max(c_outer);
    let nondegenerate = HypothesisOutcome {
        name: "nondegenerate",
        pass: near_witnesses.is_empty() && c_near.is_finite(),
        constant: (near_witnesses.is_empty() && c_near.is_finite()).then_some(c_near),
        witnesses: near_witnesses,
    };

    // smoothness: derivative consistent with eval, curvature estimate stable under step refinement
    let mut smooth_witnesses = Vec::new();
    for &t in &pts {
        let d = 1e-5 * (1.0 + t.abs());
        let fd = (ev(t + d) - ev(t - d)) / (2.0 * d);
        let der = dv(t);
        let mismatch = (fd - der).abs() > 1e-4 * (1.0 + der.abs().max(fd.abs()));
        let curv = |step: f64| (dv(t + step) - dv(t - step)) / (2.0 * step);
        let (c1, c2) = (curv(1e-3 * (1.0 + t.abs())), curv(1e-4 * (1.0 + t.abs())));
        let kink = c2.abs() > 5.0 * c1.abs() + 1.0;
        if mismatch || kink {
            smooth_witnesses.push(t);
        }
    }
    let smooth = HypothesisOutcome {
        name: "smooth",
        pass: smooth_witnesses.is_empty(),
        constant: None,
        witnesses: smooth_witnesses,
    };

    Ok(HypothesisReport { wells, growth, nondegenerate, smooth })
}
