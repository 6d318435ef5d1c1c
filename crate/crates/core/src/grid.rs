//! Uniform truncated grids on the real line and the operations every
//! travelling-wave equation needs: shifted evaluation at non-integer offsets,
//! finite differences and trapezoid inner products.
//!
//! Values outside `[-L, L]` are never stored. A [`Profile`] carries the
//! left/right limits it approaches, and every sample beyond the grid falls
//! back to those limits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MIN_NODES: usize = 11;
const INTEGRALITY_TOL: f64 = 1e-12;
/// Interpolation offsets closer than this to a node snap onto it.
const SNAP_TOL: f64 = 1e-10;

/// Uniform grid `xi_k = -L + k h`, `k = 0..N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_width: f64,
    spacing: f64,
    nodes: usize,
}

impl Grid {
    pub fn new(half_width: f64, spacing: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Config(format!("grid half-width must be positive, got L = {half_width}")));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::Config(format!("grid spacing must be positive, got h = {spacing}")));
        }
        let intervals = 2.0 * half_width / spacing;
        let rounded = intervals.round();
        if (intervals - rounded).abs() > INTEGRALITY_TOL * rounded.max(1.0) {
            return Err(Error::Config(format!(
                "2L/h must be an integer: L = {half_width}, h = {spacing} give 2L/h = {intervals:.6}"
            )));
        }
        let nodes = rounded as usize + 1;
        if nodes < MIN_NODES {
            return Err(Error::Config(format!(
                "grid with L = {half_width}, h = {spacing} has {nodes} nodes, at least {MIN_NODES} required"
            )));
        }
        Ok(Self { half_width, spacing, nodes })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.nodes
    }

    pub fn is_empty(&self) -> bool {
        self.nodes == 0
    }

    pub fn node(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.spacing
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nodes).map(move |k| self.node(k))
    }

    /// Index of the node closest to `xi = 0`.
    pub fn center(&self) -> usize {
        self.nodes / 2
    }

    /// Trapezoid weights.
    pub fn weights(&self) -> Vec<f64> {
        let mut w = vec![self.spacing; self.nodes];
        w[0] *= 0.5;
        w[self.nodes - 1] *= 0.5;
        w
    }

    /// Same node set, compared with a relative tolerance on `h` and `L`.
    pub fn matches(&self, other: &Grid) -> bool {
        self.nodes == other.nodes
            && (self.spacing - other.spacing).abs() <= 1e-14 * self.spacing
            && (self.half_width - other.half_width).abs() <= 1e-14 * self.half_width
    }

    /// Interpolation stencil realizing `p(xi_k + shift)` for every node.
    pub fn shift_stencil(&self, shift: f64) -> ShiftStencil {
        ShiftStencil { taps: (0..self.nodes).map(|k| self.tap_at(self.node(k) + shift)).collect() }
    }

    /// Interpolation rule for the value at an arbitrary point `x`.
    pub fn tap_at(&self, x: f64) -> Tap {
        let h = self.spacing;
        let n = self.nodes as i64;
        if x < -self.half_width - SNAP_TOL * h {
            return Tap::Left;
        }
        if x > self.half_width + SNAP_TOL * h {
            return Tap::Right;
        }
        let pos = (x + self.half_width) / h;
        let nearest = pos.round();
        if (pos - nearest).abs() < SNAP_TOL {
            return Tap::Node(nearest as usize);
        }
        let base = pos.floor() as i64;
        let t = pos - base as f64;
        let w = [
            -t * (t - 1.0) * (t - 2.0) / 6.0,
            (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
            -(t + 1.0) * t * (t - 2.0) / 2.0,
            (t + 1.0) * t * (t - 1.0) / 6.0,
        ];
        let mut entries = [Entry::Left(0.0); 4];
        for (m, weight) in w.iter().enumerate() {
            let j = base - 1 + m as i64;
            entries[m] = if j < 0 {
                Entry::Left(*weight)
            } else if j >= n {
                Entry::Right(*weight)
            } else {
                Entry::Node(j as usize, *weight)
            };
        }
        Tap::Cubic(entries)
    }
}

/// One weighted contribution to an interpolated value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Entry {
    Node(usize, f64),
    /// Ghost node beyond `-L`, valued at the left limit.
    Left(f64),
    /// Ghost node beyond `+L`, valued at the right limit.
    Right(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tap {
    Left,
    Right,
    Node(usize),
    Cubic([Entry; 4]),
}

/// Precomputed 4-point Lagrange stencils for a fixed shift.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftStencil {
    taps: Vec<Tap>,
}

impl ShiftStencil {
    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    /// Evaluates the shifted samples of one component.
    pub fn apply(&self, values: &[f64], left: f64, right: f64) -> Vec<f64> {
        self.taps.iter().map(|tap| tap.eval(values, left, right)).collect()
    }

    /// Visits the nonzero derivatives `d p(xi_k + s) / d p_j` for row `k`.
    pub fn for_each_weight(&self, k: usize, mut f: impl FnMut(usize, f64)) {
        match &self.taps[k] {
            Tap::Left | Tap::Right => {}
            Tap::Node(j) => f(*j, 1.0),
            Tap::Cubic(entries) => {
                for e in entries {
                    if let Entry::Node(j, w) = e {
                        f(*j, *w);
                    }
                }
            }
        }
    }
}

impl Tap {
    pub fn eval(&self, values: &[f64], left: f64, right: f64) -> f64 {
        match self {
            Tap::Left => left,
            Tap::Right => right,
            Tap::Node(j) => values[*j],
            Tap::Cubic(entries) => entries
                .iter()
                .map(|e| match *e {
                    Entry::Node(j, w) => w * values[j],
                    Entry::Left(w) => w * left,
                    Entry::Right(w) => w * right,
                })
                .sum(),
        }
    }
}

/// Grid function with one or two components and known far-field limits.
///
/// Values are stored component-major: `values[c * N + k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    grid: Grid,
    components: usize,
    values: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl Profile {
    pub fn new(grid: Grid, components: usize, values: Vec<f64>, left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        if components == 0 || values.len() != grid.len() * components {
            return Err(Error::Config(format!(
                "profile needs {} values for {} component(s), got {}",
                grid.len() * components,
                components,
                values.len()
            )));
        }
        if left.len() != components || right.len() != components {
            return Err(Error::Config("one left and one right limit per component required".into()));
        }
        if left.iter().chain(right.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Config("profile limits must be finite".into()));
        }
        Ok(Self { grid, components, values, left, right })
    }

    /// Samples a scalar function; the limits are taken from the end nodes.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = grid.nodes().map(f).collect();
        let left = vec![values[0]];
        let right = vec![values[values.len() - 1]];
        Self { grid, components: 1, values, left, right }
    }

    /// Samples a scalar function with explicit limits.
    pub fn from_fn_with_limits(grid: Grid, left: f64, right: f64, f: impl Fn(f64) -> f64) -> Self {
        Self { grid, components: 1, values: grid.nodes().map(f).collect(), left: vec![left], right: vec![right] }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self::from_fn_with_limits(grid, value, value, |_| value)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.grid.len();
        &self.values[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.grid.len();
        &mut self.values[c * n..(c + 1) * n]
    }

    pub fn left_limit(&self) -> &[f64] {
        &self.left
    }

    pub fn right_limit(&self) -> &[f64] {
        &self.right
    }

    /// Copy with new values and the same grid, components and limits.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.values.len());
        Self { values, ..self.clone() }
    }

    /// Copy with zero limits, used for derivatives and perturbations.
    pub fn with_values_decaying(&self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.values.len());
        Self {
            grid: self.grid,
            components: self.components,
            values,
            left: vec![0.0; self.components],
            right: vec![0.0; self.components],
        }
    }

    pub fn same_shape(&self, other: &Profile) -> bool {
        self.components == other.components && self.grid.matches(&other.grid)
    }

    /// Interpolated value of component `c` at `x`.
    pub fn eval(&self, c: usize, x: f64) -> f64 {
        self.grid.tap_at(x).eval(self.component(c), self.left[c], self.right[c])
    }

    /// Returns `q` with `q(xi_k) = p(xi_k + s)`.
    pub fn shift_sample(&self, s: f64) -> Profile {
        self.shift_with(&self.grid.shift_stencil(s))
    }

    pub fn shift_with(&self, stencil: &ShiftStencil) -> Profile {
        let mut out = Vec::with_capacity(self.values.len());
        for c in 0..self.components {
            out.extend(stencil.apply(self.component(c), self.left[c], self.right[c]));
        }
        self.with_values(out)
    }

    /// First derivative: central differences, one-sided second-order ends.
    pub fn diff1(&self) -> Profile {
        let mut out = Vec::with_capacity(self.values.len());
        for c in 0..self.components {
            out.extend(diff1_slice(self.component(c), self.grid.spacing()));
        }
        self.with_values_decaying(out)
    }

    /// Second derivative: central differences, one-sided second-order ends.
    pub fn diff2(&self) -> Profile {
        let mut out = Vec::with_capacity(self.values.len());
        for c in 0..self.components {
            out.extend(diff2_slice(self.component(c), self.grid.spacing()));
        }
        self.with_values_decaying(out)
    }

    /// Trapezoid rule of the component-summed pointwise product.
    pub fn quad_inner(&self, other: &Profile) -> Result<f64> {
        if !self.same_shape(other) {
            return Err(Error::GridMismatch);
        }
        Ok(self.dot_weighted(other))
    }

    pub(crate) fn dot_weighted(&self, other: &Profile) -> f64 {
        let n = self.grid.len();
        let h = self.grid.spacing();
        let mut total = 0.0;
        for c in 0..self.components {
            let a = self.component(c);
            let b = other.component(c);
            let mut s: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            s -= 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]);
            total += h * s;
        }
        total
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, factor: f64) -> Profile {
        let mut p = self.clone();
        p.values.iter_mut().for_each(|v| *v *= factor);
        p.left.iter_mut().for_each(|v| *v *= factor);
        p.right.iter_mut().for_each(|v| *v *= factor);
        p
    }

    /// `self + factor * other`, limits combined the same way.
    pub fn axpy(&self, factor: f64, other: &Profile) -> Profile {
        let mut p = self.clone();
        for (v, o) in p.values.iter_mut().zip(&other.values) {
            *v += factor * o;
        }
        for (v, o) in p.left.iter_mut().zip(&other.left) {
            *v += factor * o;
        }
        for (v, o) in p.right.iter_mut().zip(&other.right) {
            *v += factor * o;
        }
        p
    }

    /// Swaps the two components of a bichromatic profile.
    pub fn swap_components(&self) -> Profile {
        assert_eq!(self.components, 2);
        let n = self.grid.len();
        let mut values = Vec::with_capacity(2 * n);
        values.extend_from_slice(self.component(1));
        values.extend_from_slice(self.component(0));
        Profile {
            grid: self.grid,
            components: 2,
            values,
            left: vec![self.left[1], self.left[0]],
            right: vec![self.right[1], self.right[0]],
        }
    }
}

pub(crate) fn diff1_slice(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![0.0; n];
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    for k in 1..n - 1 {
        out[k] = (v[k + 1] - v[k - 1]) / (2.0 * h);
    }
    out[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    out
}

pub(crate) fn diff2_slice(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let h2 = h * h;
    let mut out = vec![0.0; n];
    out[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
    for k in 1..n - 1 {
        out[k] = (v[k + 1] - 2.0 * v[k] + v[k - 1]) / h2;
    }
    out[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
    out
}

/// Finite-difference stencils `(offset, coefficient)` used by `diff1` at node `k`.
pub(crate) fn diff1_stencil(k: usize, n: usize, h: f64) -> [(usize, f64); 3] {
    let s = 1.0 / (2.0 * h);
    if k == 0 {
        [(0, -3.0 * s), (1, 4.0 * s), (2, -s)]
    } else if k == n - 1 {
        [(n - 1, 3.0 * s), (n - 2, -4.0 * s), (n - 3, s)]
    } else {
        [(k - 1, -s), (k + 1, s), (k, 0.0)]
    }
}

/// Second-order upwind first derivative for transport in direction `velocity`
/// (backward differences for positive, forward for negative, central for zero).
///
/// Central differences leave the sawtooth mode `(-1)^k` undamped, which puts
/// spurious eigenvalues of the wave linearization near zero.
pub(crate) fn upwind_stencil(k: usize, n: usize, h: f64, velocity: f64) -> [(usize, f64); 3] {
    let s = 1.0 / (2.0 * h);
    if velocity > 0.0 && k >= 2 {
        [(k - 2, s), (k - 1, -4.0 * s), (k, 3.0 * s)]
    } else if velocity < 0.0 && k + 2 < n {
        [(k, -3.0 * s), (k + 1, 4.0 * s), (k + 2, -s)]
    } else {
        diff1_stencil(k, n, h)
    }
}

pub(crate) fn upwind_slice(v: &[f64], h: f64, velocity: f64) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|k| upwind_stencil(k, n, h, velocity).iter().map(|(j, w)| w * v[*j]).sum()).collect()
}

pub(crate) fn diff2_stencil(k: usize, n: usize, h: f64) -> [(usize, f64); 4] {
    let s = 1.0 / (h * h);
    if k == 0 {
        [(0, 2.0 * s), (1, -5.0 * s), (2, 4.0 * s), (3, -s)]
    } else if k == n - 1 {
        [(n - 1, 2.0 * s), (n - 2, -5.0 * s), (n - 3, 4.0 * s), (n - 4, -s)]
    } else {
        [(k - 1, s), (k, -2.0 * s), (k + 1, s), (k, 0.0)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn node_counts() {
        assert_eq!(Grid::new(20.0, 0.1).unwrap().len(), 401);
        assert_eq!(Grid::new(10.0, 0.05).unwrap().len(), 401);
    }

    #[test]
    fn rejects_non_integral_spacing() {
        let err = Grid::new(10.0, 0.3).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("L = 10") && msg.contains("h = 0.3"), "{msg}");
        assert!(Grid::new(-1.0, 0.1).is_err());
        assert!(Grid::new(1.0, 0.0).is_err());
        assert!(Grid::new(0.2, 0.1).is_err());
    }

    #[test]
    fn zero_shift_is_identity() {
        let g = Grid::new(10.0, 0.1).unwrap();
        let p = Profile::from_fn(g, |x| x.tanh());
        assert_eq!(p.shift_sample(0.0), p);
    }

    #[test]
    fn cubic_shift_is_exact() {
        let g = Grid::new(10.0, 0.1).unwrap();
        let cubic = |x: f64| 0.3 * x * x * x - x * x + 2.0 * x - 1.0;
        let p = Profile::from_fn(g, cubic);
        for s in [0.37, -0.81, 1.0 / 2f64.sqrt(), 0.6] {
            let q = p.shift_sample(s);
            for (k, x) in g.nodes().enumerate() {
                // interior arguments whose stencil stays on the grid
                if x + s > -10.0 + 0.2 && x + s < 10.0 - 0.2 {
                    let exact = cubic(x + s);
                    assert!((q.values()[k] - exact).abs() <= 1e-12 * exact.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn arguments_beyond_grid_use_limits() {
        let g = Grid::new(5.0, 0.1).unwrap();
        let p = Profile::from_fn_with_limits(g, -1.0, 1.0, |x| x.tanh());
        let q = p.shift_sample(0.7);
        assert_eq!(q.values()[g.len() - 1], 1.0);
        let q = p.shift_sample(-0.7);
        assert_eq!(q.values()[0], -1.0);
    }

    #[test]
    fn shifted_sine_is_fourth_order() {
        let s = 1.0 / 2f64.sqrt();
        let err = |h: f64| {
            let g = Grid::new(20.0, h).unwrap();
            let p = Profile::from_fn(g, f64::sin);
            let q = p.shift_sample(s);
            g.nodes()
                .enumerate()
                .filter(|(_, x)| x.abs() < 15.0)
                .map(|(k, x)| (q.values()[k] - (x + s).sin()).abs())
                .fold(0.0, f64::max)
        };
        // Leading error is h^4 |t (t^2 - 1)(t - 2)| / 24 times the fourth
        // derivative, with t the fractional offset, which differs between grids.
        let omega = |h: f64| {
            let t = (s / h).fract();
            (t * (t * t - 1.0) * (t - 2.0)).abs()
        };
        let ratio = err(0.1) / err(0.05);
        let expected = 16.0 * omega(0.1) / omega(0.05);
        assert!((ratio / expected - 1.0).abs() < 0.1, "ratio {ratio}, expected {expected}");
    }

    #[test]
    fn derivatives() {
        let g = Grid::new(20.0, 0.05).unwrap();
        assert!(Profile::constant(g, 3.0).diff1().max_abs() < 1e-12);
        assert!(Profile::constant(g, 3.0).diff2().max_abs() < 1e-9);
        let lin = Profile::from_fn(g, |x| 2.0 * x + 1.0).diff1();
        assert!(lin.values().iter().all(|v| (v - 2.0).abs() < 1e-12));
        let d = Profile::from_fn(g, f64::sin).diff1();
        let err = g.nodes().zip(d.values()).map(|(x, v)| (v - x.cos()).abs()).fold(0.0, f64::max);
        assert!(err <= 5e-4, "{err}");
        let d2 = Profile::from_fn(g, f64::sin).diff2();
        let err2 = g.nodes().zip(d2.values()).map(|(x, v)| (v + x.sin()).abs()).fold(0.0, f64::max);
        assert!(err2 <= 5e-3, "{err2}");
    }

    #[test]
    fn inner_products() {
        let g = Grid::new(10.0, 0.05).unwrap();
        let one = Profile::constant(g, 1.0);
        assert!((one.quad_inner(&one).unwrap() - 20.0).abs() < 1e-12);
        let gauss = Profile::from_fn(g, |x| (-x * x).exp());
        let v = gauss.quad_inner(&gauss).unwrap();
        assert!((v - (PI / 2.0).sqrt()).abs() < 1e-8, "{v}");
        let other = Profile::from_fn(Grid::new(10.0, 0.1).unwrap(), |x| x);
        assert_eq!(gauss.quad_inner(&other), Err(Error::GridMismatch));
    }
}
