//! Uniform grids and the sampled fields that live on them.
//!
//! One-dimensional grids carry `n` cells and `n + 1` nodes. Two-dimensional
//! grids are node lattices over a bounding box with a membership mask and a
//! per-node quadrature weight; the weight of a boundary node is the fraction of
//! a small disc around it that lies inside the domain, which makes the nodal
//! quadrature exact on constants for every polygon whose vertices are nodes.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform partition of `[lo, hi]` into `n` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D<T> {
    lo: T,
    hi: T,
    n: usize,
}

impl<T: Real> Grid1D<T> {
    pub const MIN_CELLS: usize = 4;

    pub fn new(lo: T, hi: T, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::InvalidGrid(format!("need lo < hi, got [{lo}, {hi}]")));
        }
        if n < Self::MIN_CELLS {
            return Err(Error::InvalidGrid(format!("need at least {} cells, got {n}", Self::MIN_CELLS)));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    /// Number of cells.
    pub fn cells(&self) -> usize {
        self.n
    }

    /// Number of nodes, `cells() + 1`.
    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn length(&self) -> T {
        self.hi - self.lo
    }

    pub fn h(&self) -> T {
        (self.hi - self.lo) / T::of(self.n)
    }

    pub fn node(&self, i: usize) -> T {
        if i == self.n {
            self.hi
        } else {
            self.lo + T::of(i) * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..=self.n).map(|i| self.node(i)).collect()
    }

    /// Composite-trapezoid weights.
    pub fn trapezoid_weights(&self) -> Vec<T> {
        let h = self.h();
        let mut w = vec![h; self.n + 1];
        w[0] = h / T::lit(2.0);
        w[self.n] = h / T::lit(2.0);
        w
    }

    /// Same interval with twice as many cells; every node of `self` is a node of the result.
    pub fn refined(&self) -> Self {
        Self { n: 2 * self.n, ..*self }
    }

    /// Grid with the same spacing extended by `left` cells to the left and `right` to the right.
    pub fn extended(&self, left: usize, right: usize) -> Self {
        let h = self.h();
        Self { lo: self.lo - T::of(left) * h, hi: self.hi + T::of(right) * h, n: self.n + left + right }
    }

    /// Index of the cell containing `x`, clamped to the grid.
    pub fn cell_of(&self, x: T) -> usize {
        let s = ((x - self.lo) / self.h()).floor();
        if s <= T::zero() {
            0
        } else {
            s.to_usize().unwrap_or(self.n - 1).min(self.n - 1)
        }
    }
}

/// Values sampled at the nodes of a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField1D<T> {
    grid: Grid1D<T>,
    values: Vec<T>,
}

impl<T: Real> ScalarField1D<T> {
    pub fn new(grid: Grid1D<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!("field has {} values for {} nodes", values.len(), grid.len())));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { what: "field", index });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every node.
    pub fn sample<F: Fn(T) -> T>(grid: Grid1D<T>, f: F) -> Result<Self> {
        Self::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn constant(grid: Grid1D<T>, value: T) -> Self {
        Self { grid, values: vec![value; grid.len()] }
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Replaces the values, keeping the grid.
    pub fn with_values(&self, values: Vec<T>) -> Result<Self> {
        Self::new(self.grid, values)
    }

    /// Mirror image `x -> lo + hi - x`.
    pub fn reversed(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self { grid: self.grid, values }
    }

    /// Same values on the grid `[lo, hi]` mapped affinely onto `[new_lo, new_hi]`.
    pub fn relabeled(&self, new_lo: T, new_hi: T) -> Result<Self> {
        let grid = Grid1D::new(new_lo, new_hi, self.grid.cells())?;
        Ok(Self { grid, values: self.values.clone() })
    }

    /// Piecewise-cubic interpolant (four-point Lagrange per cell), constant
    /// extrapolation of the end values outside the grid.
    pub fn eval_at(&self, x: T) -> T {
        let g = &self.grid;
        if x <= g.lo() {
            return self.values[0];
        }
        if x >= g.hi() {
            return self.values[g.cells()];
        }
        let k = g.cell_of(x);
        let (k0, offsets) = stencil_offsets(k, g.cells());
        let s = (x - g.node(k)) / g.h();
        let basis = lagrange_basis(&offsets, s);
        (0..4).fold(T::zero(), |acc, m| acc + basis[m] * self.values[k0 + m])
    }

    /// Running integral of the same piecewise-cubic interpolant used by [`Self::eval_at`].
    pub fn antiderivative(&self) -> Antiderivative<T> {
        let g = self.grid;
        let mut cumulative = Vec::with_capacity(g.len());
        cumulative.push(T::zero());
        let mut acc = T::zero();
        let h = g.h();
        for k in 0..g.cells() {
            let (k0, offsets) = stencil_offsets(k, g.cells());
            let w = lagrange_integrals(&offsets, T::one());
            let cell = (0..4).fold(T::zero(), |a, m| a + w[m] * self.values[k0 + m]);
            acc = acc + cell * h;
            cumulative.push(acc);
        }
        Antiderivative { field: self.clone(), cumulative }
    }
}

/// `x -> ∫_lo^x f`, exact for cubic `f`.
#[derive(Debug, Clone)]
pub struct Antiderivative<T> {
    field: ScalarField1D<T>,
    cumulative: Vec<T>,
}

impl<T: Real> Antiderivative<T> {
    /// Integral from the left endpoint to `x`; `x` must lie in the grid.
    pub fn at(&self, x: T) -> T {
        let g = self.field.grid();
        if x <= g.lo() {
            return T::zero();
        }
        if x >= g.hi() {
            return self.cumulative[g.cells()];
        }
        let k = g.cell_of(x);
        let xk = g.node(k);
        if x == xk {
            return self.cumulative[k];
        }
        let (k0, offsets) = stencil_offsets(k, g.cells());
        let s = (x - xk) / g.h();
        let w = lagrange_integrals(&offsets, s);
        let part = (0..4).fold(T::zero(), |a, m| a + w[m] * self.field.values()[k0 + m]);
        self.cumulative[k] + part * g.h()
    }

    pub fn at_node(&self, i: usize) -> T {
        self.cumulative[i]
    }
}

fn stencil_offsets<T: Real>(k: usize, cells: usize) -> (usize, [T; 4]) {
    let k0 = k.saturating_sub(1).min(cells - 3);
    let base = k0 as isize - k as isize;
    let offsets = [0, 1, 2, 3].map(|m| T::lit((base + m) as f64));
    (k0, offsets)
}

fn lagrange_basis<T: Real>(nodes: &[T; 4], s: T) -> [T; 4] {
    let mut out = [T::one(); 4];
    for m in 0..4 {
        for q in 0..4 {
            if q != m {
                out[m] = out[m] * (s - nodes[q]) / (nodes[m] - nodes[q]);
            }
        }
    }
    out
}

/// `∫_0^s L_m(σ) dσ` for the four Lagrange basis polynomials on `nodes`.
fn lagrange_integrals<T: Real>(nodes: &[T; 4], s: T) -> [T; 4] {
    let mut out = [T::zero(); 4];
    for m in 0..4 {
        // Expand the numerator as a monomial series c0 + c1 σ + c2 σ² + c3 σ³.
        let mut coeffs = [T::one(), T::zero(), T::zero(), T::zero()];
        let mut denom = T::one();
        let mut deg = 0;
        for q in 0..4 {
            if q == m {
                continue;
            }
            let root = nodes[q];
            let mut next = [T::zero(); 4];
            for d in 0..=deg {
                next[d + 1] = next[d + 1] + coeffs[d];
                next[d] = next[d] - root * coeffs[d];
            }
            coeffs = next;
            deg += 1;
            denom = denom * (nodes[m] - root);
        }
        let mut integral = T::zero();
        let mut power = s;
        for (d, c) in coeffs.iter().enumerate() {
            integral = integral + *c * power / T::of(d + 1);
            power = power * s;
        }
        out[m] = integral / denom;
    }
    out
}

/// Shape of a two-dimensional domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape<T> {
    /// Axis-aligned rectangle `[x0, x0 + width] × [y0, y0 + height]`.
    Rectangle { width: T, height: T },
    /// `{0 < y < R/2, y < x < R - y}` (closure sampled).
    TriangleTPlus { radius: T },
    /// `{0 ≤ x ≤ R, |y| ≤ min(x, R - x)}`.
    Diamond { radius: T },
}

/// Edge of a rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Bottom,
    Top,
    Left,
    Right,
}

/// Node lattice with a domain mask and nodal quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D<T> {
    shape: Shape<T>,
    origin: (T, T),
    hx: T,
    hy: T,
    nx: usize,
    ny: usize,
    mask: Vec<bool>,
    weights: Vec<T>,
}

impl<T: Real> Grid2D<T> {
    /// Rectangle with `nx × ny` cells.
    pub fn rectangle(origin: (T, T), width: T, height: T, nx: usize, ny: usize) -> Result<Self> {
        if !(width > T::zero() && height > T::zero()) {
            return Err(Error::InvalidGrid("rectangle extent must be positive".into()));
        }
        if nx < 4 || ny < 4 {
            return Err(Error::InvalidGrid("rectangle needs at least 4 cells per axis".into()));
        }
        let hx = width / T::of(nx);
        let hy = height / T::of(ny);
        let half = T::lit(0.5);
        let mut weights = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                let wx = if i == 0 || i == nx { half } else { T::one() };
                let wy = if j == 0 || j == ny { half } else { T::one() };
                weights.push(wx * wy * hx * hy);
            }
        }
        Ok(Self {
            shape: Shape::Rectangle { width, height },
            origin,
            hx,
            hy,
            nx,
            ny,
            mask: vec![true; (nx + 1) * (ny + 1)],
            weights,
        })
    }

    /// Triangle `T_R^+` with `n` cells along its base (`n` even, `n ≥ 8`).
    pub fn triangle(radius: T, n: usize) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::InvalidGrid(format!("triangle radius must be positive, got {radius}")));
        }
        if n < 8 || n % 2 == 1 {
            return Err(Error::InvalidGrid(format!("triangle needs an even cell count ≥ 8, got {n}")));
        }
        let h = radius / T::of(n);
        let ny = n / 2;
        let mut mask = Vec::with_capacity((n + 1) * (ny + 1));
        let mut weights = Vec::with_capacity((n + 1) * (ny + 1));
        let half = T::lit(0.5);
        for j in 0..=ny {
            for i in 0..=n {
                let inside = j <= i && i + j <= n;
                mask.push(inside);
                let w = if !inside {
                    T::zero()
                } else if (i == 0 || i == n) && j == 0 {
                    T::lit(0.125)
                } else if j == ny {
                    T::lit(0.25)
                } else if j == 0 || i == j || i + j == n {
                    half
                } else {
                    T::one()
                };
                weights.push(w * h * h);
            }
        }
        Ok(Self {
            shape: Shape::TriangleTPlus { radius },
            origin: (T::zero(), T::zero()),
            hx: h,
            hy: h,
            nx: n,
            ny,
            mask,
            weights,
        })
    }

    /// Diamond `T_R` with `n` cells along its axis (`n` even, `n ≥ 8`).
    pub fn diamond(radius: T, n: usize) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::InvalidGrid(format!("diamond radius must be positive, got {radius}")));
        }
        if n < 8 || n % 2 == 1 {
            return Err(Error::InvalidGrid(format!("diamond needs an even cell count ≥ 8, got {n}")));
        }
        let h = radius / T::of(n);
        let half_n = n / 2;
        let mut mask = Vec::with_capacity((n + 1) * (n + 1));
        let mut weights = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            let dy = j.abs_diff(half_n);
            for i in 0..=n {
                let reach = i.min(n - i);
                let inside = dy <= reach;
                mask.push(inside);
                let w = if !inside {
                    T::zero()
                } else if reach == dy && (dy == 0 || dy == half_n) {
                    T::lit(0.25)
                } else if reach == dy {
                    T::lit(0.5)
                } else {
                    T::one()
                };
                weights.push(w * h * h);
            }
        }
        Ok(Self {
            shape: Shape::Diamond { radius },
            origin: (T::zero(), -radius / T::lit(2.0)),
            hx: h,
            hy: h,
            nx: n,
            ny: n,
            mask,
            weights,
        })
    }

    pub fn shape(&self) -> Shape<T> {
        self.shape
    }

    pub fn origin(&self) -> (T, T) {
        self.origin
    }

    pub fn hx(&self) -> T {
        self.hx
    }

    pub fn hy(&self) -> T {
        self.hy
    }

    /// Cells along x.
    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Cells along y.
    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Total lattice nodes, masked or not.
    pub fn node_count(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % (self.nx + 1), idx / (self.nx + 1))
    }

    pub fn x(&self, i: usize) -> T {
        self.origin.0 + T::of(i) * self.hx
    }

    pub fn y(&self, j: usize) -> T {
        self.origin.1 + T::of(j) * self.hy
    }

    pub fn is_masked(&self, i: usize, j: usize) -> bool {
        i <= self.nx && j <= self.ny && self.mask[self.index(i, j)]
    }

    /// Mask lookup with signed lattice coordinates; out-of-box is unmasked.
    pub fn is_masked_signed(&self, i: isize, j: isize) -> bool {
        i >= 0 && j >= 0 && self.is_masked(i as usize, j as usize)
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Area of the exact domain.
    pub fn area(&self) -> T {
        match self.shape {
            Shape::Rectangle { width, height } => width * height,
            Shape::TriangleTPlus { radius } => radius * radius / T::lit(4.0),
            Shape::Diamond { radius } => radius * radius / T::lit(2.0),
        }
    }

    /// Whether an arbitrary point lies in the closed domain.
    pub fn contains_point(&self, x: T, y: T) -> bool {
        match self.shape {
            Shape::Rectangle { width, height } => {
                let (x0, y0) = self.origin;
                x >= x0 && x <= x0 + width && y >= y0 && y <= y0 + height
            }
            Shape::TriangleTPlus { radius } => y >= T::zero() && y <= radius / T::lit(2.0) && y <= x && x <= radius - y,
            Shape::Diamond { radius } => x >= T::zero() && x <= radius && y.abs() <= x.min(radius - x),
        }
    }

    /// Node indices along one edge of a rectangle, in increasing coordinate order.
    pub fn edge_nodes(&self, edge: Edge) -> Result<Vec<usize>> {
        if !matches!(self.shape, Shape::Rectangle { .. }) {
            return Err(Error::InvalidGrid("edges are only defined for rectangles".into()));
        }
        Ok(match edge {
            Edge::Bottom => (0..=self.nx).map(|i| self.index(i, 0)).collect(),
            Edge::Top => (0..=self.nx).map(|i| self.index(i, self.ny)).collect(),
            Edge::Left => (0..=self.ny).map(|j| self.index(0, j)).collect(),
            Edge::Right => (0..=self.ny).map(|j| self.index(self.nx, j)).collect(),
        })
    }

    /// Spacing and length of a rectangle edge.
    pub fn edge_grid(&self, edge: Edge) -> Result<Grid1D<T>> {
        match (self.shape, edge) {
            (Shape::Rectangle { width, .. }, Edge::Bottom | Edge::Top) => {
                Grid1D::new(self.origin.0, self.origin.0 + width, self.nx)
            }
            (Shape::Rectangle { height, .. }, Edge::Left | Edge::Right) => {
                Grid1D::new(self.origin.1, self.origin.1 + height, self.ny)
            }
            _ => Err(Error::InvalidGrid("edges are only defined for rectangles".into())),
        }
    }
}

/// Values on the nodes of a [`Grid2D`]; entries outside the mask are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2D<T> {
    grid: Arc<Grid2D<T>>,
    values: Vec<T>,
}

impl<T: Real> ScalarField2D<T> {
    pub fn new(grid: Arc<Grid2D<T>>, mut values: Vec<T>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values for {} lattice nodes",
                values.len(),
                grid.node_count()
            )));
        }
        for (idx, v) in values.iter_mut().enumerate() {
            if grid.mask()[idx] {
                if !v.is_finite() {
                    return Err(Error::NonFiniteValue { what: "2-D field", index: idx });
                }
            } else {
                *v = T::zero();
            }
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x, y)` at every masked node.
    pub fn sample<F: Fn(T, T) -> T>(grid: Arc<Grid2D<T>>, f: F) -> Result<Self> {
        let mut values = vec![T::zero(); grid.node_count()];
        for (idx, v) in values.iter_mut().enumerate() {
            if grid.mask()[idx] {
                let (i, j) = grid.coords(idx);
                *v = f(grid.x(i), grid.y(j));
            }
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid2D<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn with_values(&self, values: Vec<T>) -> Result<Self> {
        Self::new(self.grid.clone(), values)
    }

    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[self.grid.index(i, j)]
    }

    /// Nodal restriction to one rectangle edge.
    pub fn trace(&self, edge: Edge) -> Result<ScalarField1D<T>> {
        let nodes = self.grid.edge_nodes(edge)?;
        let grid = self.grid.edge_grid(edge)?;
        ScalarField1D::new(grid, nodes.iter().map(|&k| self.values[k]).collect())
    }

    /// Weighted mean over the domain.
    pub fn average(&self) -> T {
        let w = self.grid.weights();
        let num = crate::sum::pairwise_sum_by(w.len(), |k| w[k] * self.values[k]);
        let den = crate::sum::pairwise_sum(w);
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_nodes_and_spacing() {
        let g = Grid1D::new(-1.0, 1.0, 4).unwrap();
        assert_eq!(g.nodes(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(Grid1D::new(0.0, 5.0, 10).unwrap().h(), 0.5);
        assert!(Grid1D::new(1.0, 1.0, 8).is_err());
        assert!(Grid1D::new(0.0, 1.0, 3).is_err());
        assert!(Grid1D::new(2.0, 1.0, 8).is_err());
    }

    #[test]
    fn sampling() {
        let g = Grid1D::new(0.0, 1.0, 4).unwrap();
        assert_eq!(ScalarField1D::sample(g, |x| x).unwrap().values(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(ScalarField1D::sample(g, |_| 0.0).unwrap().values().iter().all(|&v| v == 0.0));
        assert!(matches!(ScalarField1D::sample(g, |_| f64::NAN), Err(Error::NonFiniteValue { .. })));
    }

    #[test]
    fn refinement_nests_nodes() {
        let g = Grid1D::new(-0.3, 2.1, 12).unwrap();
        let f = g.refined();
        for i in 0..=g.cells() {
            assert_relative_eq!(g.node(i), f.node(2 * i), epsilon = 1e-14);
        }
    }

    #[test]
    fn cubic_interpolant_and_antiderivative_are_exact_on_cubics() {
        let g = Grid1D::new(-1.0, 2.0, 9).unwrap();
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x - 0.3 * x * x * x;
        let antider = |x: f64| x - x * x + x.powi(3) / 6.0 - 0.075 * x.powi(4);
        let f = ScalarField1D::sample(g, p).unwrap();
        let big = f.antiderivative();
        for &x in &[-1.0, -0.77, 0.0, 0.1234, 1.5, 1.99, 2.0] {
            assert_relative_eq!(f.eval_at(x), p(x), epsilon = 1e-12);
            assert_relative_eq!(big.at(x), antider(x) - antider(-1.0), epsilon = 1e-12);
        }
    }

    #[test]
    fn triangle_mask_examples() {
        let t = Grid2D::triangle(1.0, 8).unwrap();
        assert!(t.is_masked(4, 1));
        assert_relative_eq!(t.x(4), 0.5);
        assert_relative_eq!(t.y(1), 0.125);
        assert!(t.contains_point(0.5, 0.125));
        assert!(!t.contains_point(0.1, 0.4));
        assert!(!t.is_masked(1, 3));
        assert!(Grid2D::triangle(-1.0, 8).is_err());
        assert!(Grid2D::triangle(1.0, 7).is_err());
    }

    #[test]
    fn masks_agree_with_point_predicates() {
        for grid in [Grid2D::<f64>::triangle(1.7, 24).unwrap(), Grid2D::<f64>::diamond(1.7, 24).unwrap()] {
            for j in 0..=grid.ny() {
                for i in 0..=grid.nx() {
                    let (x, y) = (grid.x(i), grid.y(j));
                    let tol = 1e-12;
                    let inside = match grid.shape() {
                        Shape::TriangleTPlus { radius } => {
                            y >= -tol && y <= radius / 2.0 + tol && y <= x + tol && x <= radius - y + tol
                        }
                        Shape::Diamond { radius } => {
                            x >= -tol && x <= radius + tol && y.abs() <= x.min(radius - x) + tol
                        }
                        Shape::Rectangle { .. } => unreachable!(),
                    };
                    assert_eq!(grid.is_masked(i, j), inside, "node ({i},{j}) of {:?}", grid.shape());
                }
            }
        }
    }

    #[test]
    fn weighted_areas_are_exact() {
        for n in [8, 16, 64] {
            let t = Grid2D::triangle(2.0, n).unwrap();
            assert_relative_eq!(t.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            let d = Grid2D::diamond(2.0, n).unwrap();
            assert_relative_eq!(d.weights().iter().sum::<f64>(), 2.0, epsilon = 1e-12);
        }
        let r = Grid2D::rectangle((0.0, 0.0), 2.0, 0.5, 8, 4).unwrap();
        assert_relative_eq!(r.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn raw_mask_area_converges_at_first_order() {
        let err = |n: usize| {
            let t = Grid2D::triangle(1.0, n).unwrap();
            let a = t.masked_count() as f64 * t.hx() * t.hx();
            (a - 0.25).abs() / 0.25
        };
        let (e1, e2) = (err(64), err(128));
        assert!(e2 < e1 && e2 < 5.0 / 128.0, "{e1} {e2}");
        assert!((e1 / e2 - 2.0).abs() < 0.2);
    }

    #[test]
    fn rectangle_trace_and_edges() {
        let grid = Arc::new(Grid2D::rectangle((0.0, 0.0), 1.0, 1.0, 4, 4).unwrap());
        let u = ScalarField2D::sample(grid.clone(), |x, y| x + 10.0 * y).unwrap();
        assert_eq!(u.trace(Edge::Bottom).unwrap().values(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(u.trace(Edge::Left).unwrap().values(), &[0.0, 2.5, 5.0, 7.5, 10.0]);
        let tri = Arc::new(Grid2D::triangle(1.0, 8).unwrap());
        let v = ScalarField2D::sample(tri, |_, _| 1.0).unwrap();
        assert!(v.trace(Edge::Bottom).is_err());
    }
}
