//! Explicit RK4 integration of the planar monochromatic and doubled
//! bichromatic Nagumo lattice equations on a finite window, with interface
//! tracking.
//!
//! Component `a` evolves by
//! `u_a' = alpha (sum of the four neighbours of u_b - 4 u_a) + g(u_a)` with `b`
//! the partner component, as in the travelling-wave operator.
//!
//! Boundaries: the first and last columns are held fixed and the nodes beyond
//! them take the far-field limits. Ghost rows above and below the window are
//! the edge rows shifted horizontally by the local interface slope, which is
//! exact for planar data and reduces to mirroring at `zeta = 0`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corner::CornerPrediction;
use crate::error::{Error, Result};
use crate::model::WaveParams;
use crate::wave::WaveSolution;

pub const MIN_WINDOW: usize = 32;
/// Values must stay within `[-BOUND, BOUND]`.
pub const BOUND: f64 = 1.05;
pub const DEFAULT_DT: f64 = 0.05;
pub const DEFAULT_CADENCE: f64 = 1.0;
pub const DEFAULT_T: f64 = 50.0;
/// Sites the window must extend beyond the transition layer.
pub const LAYER_MARGIN: f64 = 10.0;
const LAYER_LEVEL: f64 = 1e-2;

/// Index ranges `[i0, i0 + nx)` by `[j0, j0 + ny)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub i0: i64,
    pub j0: i64,
    pub nx: usize,
    pub ny: usize,
}

impl Window {
    /// `nx` by `ny` sites with the origin at the center.
    pub fn centered(nx: usize, ny: usize) -> Self {
        Self { i0: -(nx as i64 / 2), j0: -(ny as i64 / 2), nx, ny }
    }

    pub fn i_range(&self) -> std::ops::Range<i64> {
        self.i0..self.i0 + self.nx as i64
    }

    pub fn j_range(&self) -> std::ops::Range<i64> {
        self.j0..self.j0 + self.ny as i64
    }

    fn check(&self) -> Result<()> {
        if self.nx < MIN_WINDOW || self.ny < MIN_WINDOW {
            return Err(Error::Window(format!(
                "window {}x{} is smaller than {MIN_WINDOW}x{MIN_WINDOW}",
                self.nx, self.ny
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    /// Far-field values beyond the first and last columns.
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    /// Ghost row above the window: `u(i, top + 1) = u(i + shift_top, top)`.
    pub shift_top: f64,
    /// Ghost row below: `u(i, bottom - 1) = u(i - shift_bottom, bottom)`.
    pub shift_bottom: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeState {
    pub window: Window,
    pub params: WaveParams,
    pub boundary: Boundary,
    pub time: f64,
    /// `values[(a * ny + jj) * nx + ii]` for site `(i0 + ii, j0 + jj)`.
    values: Vec<f64>,
}

/// `0.2 / (4 alpha_eff + max |g'| on [-1, 1])`.
pub fn dt_max(params: &WaveParams) -> f64 {
    let s = params.model.reaction_scale();
    let max_slope = s * (2.0 + 2.0 * params.rho.abs()).max(1.0 + params.rho * params.rho / 3.0);
    0.2 / (4.0 * params.diffusion() + max_slope)
}

/// Default time step `min(DEFAULT_DT, dt_max)`.
pub fn default_dt(params: &WaveParams) -> f64 {
    DEFAULT_DT.min(dt_max(params))
}

impl LatticeState {
    pub fn from_fn(
        params: WaveParams,
        window: Window,
        boundary: Boundary,
        f: impl Fn(usize, i64, i64) -> f64,
    ) -> Result<Self> {
        window.check()?;
        let d = params.model.components();
        if boundary.left.len() != d || boundary.right.len() != d {
            return Err(Error::Config(format!("boundary limits need {d} components")));
        }
        let mut values = Vec::with_capacity(d * window.nx * window.ny);
        for a in 0..d {
            for j in window.j_range() {
                for i in window.i_range() {
                    values.push(f(a, i, j));
                }
            }
        }
        Ok(Self { window, params, boundary, time: 0.0, values })
    }

    /// Constant state with mirrored top and bottom rows.
    pub fn uniform(params: WaveParams, window: Window, state: &[f64]) -> Result<Self> {
        let boundary = Boundary { left: state.to_vec(), right: state.to_vec(), shift_top: 0.0, shift_bottom: 0.0 };
        Self::from_fn(params, window, boundary, |a, _, _| state[a])
    }

    pub fn components(&self) -> usize {
        self.params.model.components()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, a: usize, i: i64, j: i64) -> f64 {
        let w = &self.window;
        let ii = (i - w.i0) as usize;
        let jj = (j - w.j0) as usize;
        self.values[(a * w.ny + jj) * w.nx + ii]
    }

    /// Row `j` of component `a` as a slice over `i0..i0 + nx`.
    pub fn row(&self, a: usize, j: i64) -> &[f64] {
        let w = &self.window;
        let start = (a * w.ny + (j - w.j0) as usize) * w.nx;
        &self.values[start..start + w.nx]
    }

    /// Crossing of the level `(u- + u+)/2` of component 0 in row `j`: first sign
    /// change from the left, linearly interpolated.
    pub fn crossing(&self, j: i64) -> Option<f64> {
        let level = 0.5 * (self.boundary.left[0] + self.boundary.right[0]);
        let row = self.row(0, j);
        for ii in 0..row.len() - 1 {
            let (a, b) = (row[ii] - level, row[ii + 1] - level);
            if a == 0.0 {
                return Some(self.window.i0 as f64 + ii as f64);
            }
            if a * b < 0.0 {
                return Some(self.window.i0 as f64 + ii as f64 + a / (a - b));
            }
        }
        None
    }

    fn rhs(&self, u: &[f64], out: &mut [f64]) {
        let w = self.window;
        let (nx, ny) = (w.nx, w.ny);
        let d = self.components();
        let alpha = self.params.diffusion();
        let g = self.params.reaction();
        let ghost = |row: &[f64], x: f64| -> f64 {
            let x = x.clamp(0.0, (nx - 1) as f64);
            let k = (x.floor() as usize).min(nx - 2);
            let t = x - k as f64;
            (1.0 - t) * row[k] + t * row[k + 1]
        };
        let mut top = vec![0.0; d * nx];
        let mut bottom = vec![0.0; d * nx];
        for a in 0..d {
            let first = &u[a * ny * nx..(a * ny + 1) * nx];
            let last = &u[(a * ny + ny - 1) * nx..(a * ny + ny) * nx];
            for ii in 0..nx {
                top[a * nx + ii] = ghost(last, ii as f64 + self.boundary.shift_top);
                bottom[a * nx + ii] = ghost(first, ii as f64 - self.boundary.shift_bottom);
            }
        }
        let model = self.params.model;
        out.par_chunks_mut(nx).enumerate().for_each(|(r, dst)| {
            let a = r / ny;
            let jj = r % ny;
            let b = model.partner(a);
            let own = &u[r * nx..(r + 1) * nx];
            let row_b = |k: usize| &u[(b * ny + k) * nx..(b * ny + k + 1) * nx];
            let centre = row_b(jj);
            let up = if jj + 1 < ny { row_b(jj + 1) } else { &top[b * nx..(b + 1) * nx] };
            let down = if jj > 0 { row_b(jj - 1) } else { &bottom[b * nx..(b + 1) * nx] };
            dst[0] = 0.0;
            dst[nx - 1] = 0.0;
            for ii in 1..nx - 1 {
                let sum = centre[ii - 1] + centre[ii + 1] + up[ii] + down[ii];
                dst[ii] = alpha * (sum - 4.0 * own[ii]) + g.value(own[ii]);
            }
        });
    }

    /// Right-hand side at the current state.
    pub fn rate(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.values.len()];
        self.rhs(&self.values, &mut out);
        out
    }

    /// One classical RK4 step in place.
    pub fn advance(&mut self, dt: f64) -> Result<()> {
        let limit = dt_max(&self.params);
        if !(dt > 0.0 && dt <= limit * (1.0 + 1e-12)) {
            return Err(Error::Config(format!("time step {dt} outside (0, {limit}]")));
        }
        let n = self.values.len();
        let u = &self.values;
        let mut k1 = vec![0.0; n];
        let mut k2 = vec![0.0; n];
        let mut k3 = vec![0.0; n];
        let mut k4 = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        self.rhs(u, &mut k1);
        tmp.par_iter_mut().enumerate().for_each(|(k, t)| *t = u[k] + 0.5 * dt * k1[k]);
        self.rhs(&tmp, &mut k2);
        tmp.par_iter_mut().enumerate().for_each(|(k, t)| *t = u[k] + 0.5 * dt * k2[k]);
        self.rhs(&tmp, &mut k3);
        tmp.par_iter_mut().enumerate().for_each(|(k, t)| *t = u[k] + dt * k3[k]);
        self.rhs(&tmp, &mut k4);
        let sixth = dt / 6.0;
        tmp.par_iter_mut()
            .enumerate()
            .for_each(|(k, t)| *t = u[k] + sixth * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]));
        if let Some(bad) = tmp.iter().position(|v| !(v.abs() <= BOUND)) {
            let w = self.window;
            let node = bad % (w.nx * w.ny);
            return Err(Error::Divergence {
                i: w.i0 + (node % w.nx) as i64,
                j: w.j0 + (node / w.nx) as i64,
                value: tmp[bad],
            });
        }
        self.values = tmp;
        self.time += dt;
        Ok(())
    }

    /// CSV rows `i,j,u[,v]` preceded by a `#` JSON header line.
    pub fn write_csv(&self, mut out: impl Write, extra: &serde_json::Value) -> std::io::Result<()> {
        let header = serde_json::json!({
            "window": self.window,
            "time": self.time,
            "params": self.params,
            "boundary": self.boundary,
            "run": extra,
        });
        writeln!(out, "# {header}")?;
        let names = if self.components() == 1 { "i,j,u" } else { "i,j,u,v" };
        writeln!(out, "{names}")?;
        for j in self.window.j_range() {
            for i in self.window.i_range() {
                write!(out, "{i},{j}")?;
                for a in 0..self.components() {
                    write!(out, ",{:.16e}", self.get(a, i, j))?;
                }
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

/// RK4 step returning the new state.
pub fn step_rk4(state: &LatticeState, dt: f64) -> Result<LatticeState> {
    let mut next = state.clone();
    next.advance(dt)?;
    Ok(next)
}

fn layer_width(sol: &WaveSolution) -> f64 {
    let phi = sol.phi();
    let grid = phi.grid();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for a in 0..phi.components() {
        let (l, r) = (phi.left_limit()[a], phi.right_limit()[a]);
        let jump = (r - l).abs().max(f64::MIN_POSITIVE);
        for (k, v) in phi.component(a).iter().enumerate() {
            if (v - l).abs() > LAYER_LEVEL * jump && (v - r).abs() > LAYER_LEVEL * jump {
                lo = lo.min(grid.node(k));
                hi = hi.max(grid.node(k));
            }
        }
    }
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

/// `u_ij(0) = Phi(i cos zeta + j sin zeta)`.
pub fn init_planar(sol: &WaveSolution, window: Window) -> Result<LatticeState> {
    window.check()?;
    let zeta = sol.params().zeta;
    let (s, c) = zeta.sin_cos();
    if !(c > 0.0 && s.abs() <= c * (1.0 + 1e-12)) {
        return Err(Error::Config(format!("planar initialization needs |zeta| <= pi/4, got {zeta}")));
    }
    let extent = window.nx as f64 * c;
    let width = layer_width(sol);
    if extent < width + LAYER_MARGIN {
        return Err(Error::Window(format!(
            "window extent {extent:.1} along the wave normal does not contain the transition layer (width {width:.1}) plus {LAYER_MARGIN} sites"
        )));
    }
    let phi = sol.phi();
    let boundary = Boundary {
        left: phi.left_limit().to_vec(),
        right: phi.right_limit().to_vec(),
        shift_top: s / c,
        shift_bottom: s / c,
    };
    LatticeState::from_fn(*sol.params(), window, boundary, |a, i, j| phi.eval(a, i as f64 * c + j as f64 * s))
}

/// `u_ij(0) = Phi*(i + theta_j)` for a corner predicted around `zeta* = 0`.
pub fn init_corner(sol: &WaveSolution, pred: &CornerPrediction, window: Window) -> Result<LatticeState> {
    window.check()?;
    if sol.params().zeta.abs() > 1e-12 {
        return Err(Error::Config(format!("corner initialization needs zeta* = 0, got {}", sol.params().zeta)));
    }
    let first = pred.l_start;
    let last = pred.l_start + pred.theta_seq.len() as i64 - 1;
    let (jb, jt) = (window.j0, window.j0 + window.ny as i64 - 1);
    if jb - 1 < first || jt + 1 > last {
        return Err(Error::Window(format!("window rows [{jb}, {jt}] exceed the predicted sequence [{first}, {last}]")));
    }
    let width = layer_width(sol);
    if (window.nx as f64) < width + LAYER_MARGIN {
        return Err(Error::Window(format!("window width {} does not contain the transition layer", window.nx)));
    }
    let phi = sol.phi();
    let boundary = Boundary {
        left: phi.left_limit().to_vec(),
        right: phi.right_limit().to_vec(),
        shift_top: pred.theta_at(jt + 1) - pred.theta_at(jt),
        shift_bottom: pred.theta_at(jb) - pred.theta_at(jb - 1),
    };
    LatticeState::from_fn(*sol.params(), window, boundary, |a, i, j| phi.eval(a, i as f64 + pred.theta_at(j)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub t_end: f64,
    /// `None` selects [`default_dt`].
    pub dt: Option<f64>,
    /// Time between recorded interface snapshots.
    pub cadence: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { t_end: DEFAULT_T, dt: None, cadence: DEFAULT_CADENCE }
    }
}

/// Recorded row crossings, one entry per snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub rows: Vec<i64>,
    pub times: Vec<f64>,
    pub crossings: Vec<Vec<Option<f64>>>,
    pub dt: f64,
}

impl History {
    pub fn new(rows: Vec<i64>, dt: f64) -> Self {
        Self { rows, times: Vec::new(), crossings: Vec::new(), dt }
    }

    pub fn record(&mut self, state: &LatticeState) {
        self.times.push(state.time);
        self.crossings.push(self.rows.iter().map(|j| state.crossing(*j)).collect());
    }
}

/// Integrates to `t_end`, recording crossings of every row at `t = 0` and
/// every `cadence` time units.
pub fn run(state: &mut LatticeState, opts: &RunOptions) -> Result<History> {
    let dt = opts.dt.unwrap_or_else(|| default_dt(&state.params));
    let mut history = History::new(state.window.j_range().collect(), dt);
    history.record(state);
    let per_snapshot = (opts.cadence / dt).round().max(1.0) as usize;
    let total = (opts.t_end / dt).round() as usize;
    let start = state.time;
    for step in 1..=total {
        state.advance(dt)?;
        // Avoid drift from repeated addition.
        state.time = start + step as f64 * dt;
        if step % per_snapshot == 0 || step == total {
            history.record(state);
        }
    }
    Ok(history)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceTrack {
    pub times: Vec<f64>,
    /// Rows bracketed in every used snapshot.
    pub rows: Vec<i64>,
    /// `positions[s][r]` for snapshot `s` and row `rows[r]`.
    pub positions: Vec<Vec<f64>>,
    pub excluded_rows: usize,
    /// Least-squares speed of each row in the `c` convention.
    pub row_speeds: Vec<f64>,
}

impl InterfaceTrack {
    pub fn mean_positions(&self) -> Vec<f64> {
        self.positions.iter().map(|p| p.iter().sum::<f64>() / p.len() as f64).collect()
    }

    /// Slope `dx/dj` of the interface in the last snapshot over rows accepted by `filter`.
    pub fn final_slope(&self, filter: impl Fn(i64) -> bool) -> Result<LineFit> {
        let last = self.positions.last().ok_or_else(|| Error::Tracking("empty track".into()))?;
        let (js, xs): (Vec<f64>, Vec<f64>) =
            self.rows.iter().zip(last).filter(|(j, _)| filter(**j)).map(|(j, x)| (*j as f64, *x)).unzip();
        linear_fit(&js, &xs).ok_or_else(|| Error::Tracking("fewer than 3 rows for the slope fit".into()))
    }
}

pub const MIN_SNAPSHOTS: usize = 10;
pub const MIN_ROWS: usize = 5;

/// Uses snapshots after a burn-in of one fifth of the recorded time span.
pub fn track_interface(history: &History) -> Result<InterfaceTrack> {
    track_rows(history, |_| true)
}

pub fn track_rows(history: &History, filter: impl Fn(i64) -> bool) -> Result<InterfaceTrack> {
    let (t0, t1) = match (history.times.first(), history.times.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => return Err(Error::Tracking("no snapshots recorded".into())),
    };
    let burn_in = t0 + 0.2 * (t1 - t0);
    let used: Vec<usize> = (0..history.times.len()).filter(|&s| history.times[s] >= burn_in - 1e-9).collect();
    if used.len() < MIN_SNAPSHOTS {
        return Err(Error::Tracking(format!(
            "{} snapshots after burn-in, need at least {MIN_SNAPSHOTS}",
            used.len()
        )));
    }
    let mut rows = Vec::new();
    let mut columns = Vec::new();
    let mut excluded = 0;
    for (r, j) in history.rows.iter().enumerate() {
        if !filter(*j) {
            continue;
        }
        let col: Option<Vec<f64>> = used.iter().map(|&s| history.crossings[s][r]).collect();
        match col {
            Some(c) => {
                rows.push(*j);
                columns.push(c);
            }
            None => excluded += 1,
        }
    }
    if rows.len() < MIN_ROWS {
        return Err(Error::Tracking(format!("{} rows with a bracketed crossing, need at least {MIN_ROWS}", rows.len())));
    }
    let times: Vec<f64> = used.iter().map(|&s| history.times[s]).collect();
    let row_speeds = columns
        .iter()
        .map(|c| linear_fit(&times, c).map(|f| -f.slope).unwrap_or(f64::NAN))
        .collect();
    let positions = (0..times.len()).map(|s| columns.iter().map(|c| c[s]).collect()).collect();
    Ok(InterfaceTrack { times, rows, positions, excluded_rows: excluded, row_speeds })
}

/// Speed `c = -dx/dt` of the mean crossing position and its standard error.
pub fn measure_speed(track: &InterfaceTrack) -> Result<(f64, f64)> {
    let fit = linear_fit(&track.times, &track.mean_positions())
        .ok_or_else(|| Error::Tracking("degenerate time samples".into()))?;
    Ok((-fit.slope, fit.slope_stderr))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

/// Ordinary least squares `y = intercept + slope x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let slope_stderr = (sse / (n as f64 - 2.0) / sxx).sqrt();
    Some(LineFit { slope, intercept, slope_stderr })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(rho: f64) -> WaveParams {
        WaveParams::monochromatic(rho, 0.0)
    }

    #[test]
    fn equilibria_are_fixed() {
        for (rho, u) in [(0.4, 1.0), (0.4, -1.0), (0.4, 0.4)] {
            let mut s = LatticeState::uniform(params(rho), Window::centered(32, 32), &[u]).unwrap();
            for _ in 0..10 {
                s.advance(0.01).unwrap();
            }
            assert!(s.values().iter().all(|v| *v == u));
        }
    }

    #[test]
    fn step_limit() {
        let p = params(0.9);
        assert!((dt_max(&p) - 0.2 / (4.0 + 9.5)).abs() < 1e-15);
        assert!(default_dt(&p) < DEFAULT_DT);
        let mut s = LatticeState::uniform(p, Window::centered(32, 32), &[1.0]).unwrap();
        assert!(matches!(s.advance(0.05), Err(Error::Config(_))));
    }

    #[test]
    fn small_window_rejected() {
        assert!(LatticeState::uniform(params(0.1), Window::centered(31, 40), &[1.0]).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let mut s = LatticeState::uniform(params(0.1), Window::centered(32, 32), &[1.0]).unwrap();
        let idx = (2 + 16) * 32 + (3 + 16);
        s.values[idx] = 1.2;
        assert!(matches!(s.advance(0.01), Err(Error::Divergence { i: 3, j: 2, .. })));
    }

    #[test]
    fn linear_fit_exact() {
        let x: Vec<f64> = (0..20).map(|k| k as f64 * 0.5).collect();
        let y: Vec<f64> = x.iter().map(|t| 3.0 - 1.25 * t).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope + 1.25).abs() < 1e-14 && f.slope_stderr < 1e-12);
    }

    #[test]
    fn synthetic_translation_speed() {
        let rows: Vec<i64> = (0..8).collect();
        let mut h = History::new(rows.clone(), 0.1);
        for s in 0..=20 {
            let t = s as f64;
            h.times.push(t);
            h.crossings.push(rows.iter().map(|j| Some(4.0 + 0.75 * t + 0.01 * *j as f64)).collect());
        }
        let track = track_interface(&h).unwrap();
        let (speed, err) = measure_speed(&track).unwrap();
        assert!((speed + 0.75).abs() < 1e-12 && err < 1e-10);
        assert_eq!(track.times.len(), 17);
    }
}
