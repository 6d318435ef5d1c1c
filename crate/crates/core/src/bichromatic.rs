//! Spatially homogeneous equilibria of the doubled lattice system and the
//! two-component (bichromatic) travelling waves connecting them.
//!
//! The cubic is `g_cub(u; rho) = (u^2 - 1)(rho - u)` with stable roots `-1`
//! and `+1`. Checkerboard equilibria `(u_bc, v_bc)` therefore lie in the open
//! square `(-1, 1)^2`, and the two wave families connect `(-1, -1)` to
//! `(u_bc, v_bc)` (lower) or `(u_bc, v_bc)` to `(1, 1)` (upper).

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Model, Reaction, WaveParams};
use crate::wave::{solve_with_connection, InitialGuess, SolverOptions, WaveSolution};

/// Which pair of states a wave connects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connection {
    /// `-1 -> +1`.
    Monochromatic,
    /// `(-1, -1) -> (u_bc, v_bc)`.
    Lower,
    /// `(u_bc, v_bc) -> (1, 1)`.
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub u: f64,
    pub v: f64,
    /// Both eigenvalues of `DG(u, v)` strictly negative.
    pub stable: bool,
    /// Largest eigenvalue of `DG(u, v)`.
    pub growth_rate: f64,
}

impl Equilibrium {
    pub fn is_checkerboard(&self) -> bool {
        (self.u - self.v).abs() > 1e-8
    }

    pub fn in_open_square(&self) -> bool {
        self.u.abs() < 1.0 && self.v.abs() < 1.0
    }
}

/// `G(u, v; rho, alpha)`.
pub fn coupling_field(u: f64, v: f64, rho: f64, alpha: f64) -> [f64; 2] {
    let g = Reaction { rho, scale: 1.0 };
    [4.0 * alpha * (v - u) + g.value(u), 4.0 * alpha * (u - v) + g.value(v)]
}

fn coupling_jacobian(u: f64, v: f64, rho: f64, alpha: f64) -> Matrix2<f64> {
    let g = Reaction { rho, scale: 1.0 };
    Matrix2::new(-4.0 * alpha + g.d1(u), 4.0 * alpha, 4.0 * alpha, -4.0 * alpha + g.d1(v))
}

/// Largest eigenvalue of `DG`.
///
/// Fourier modes of the doubled lattice linearization at a homogeneous state
/// produce `[[g'(u) - 4 alpha, alpha s], [alpha s, g'(v) - 4 alpha]]` with
/// `s in [-4, 4]`; its top eigenvalue is maximal at `|s| = 4`, which is `DG`
/// up to a sign flip of the off-diagonal.
fn growth_rate(u: f64, v: f64, rho: f64, alpha: f64) -> f64 {
    let m = coupling_jacobian(u, v, rho, alpha);
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    0.5 * tr + disc
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64], sb: f64) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += sb * y;
    }
    out
}

/// Real roots of a polynomial (ascending coefficients) via companion eigenvalues.
fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let mut c = coeffs.to_vec();
    while c.len() > 1 && c.last().map(|v| v.abs() < 1e-300).unwrap_or(false) {
        c.pop();
    }
    let deg = c.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[deg];
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -c[i] / lead;
    }
    // Unbounded Schur iterations can loop forever on companion matrices.
    let schur = nalgebra::linalg::Schur::try_new(comp.clone(), 1e-14, 10_000)
        .or_else(|| nalgebra::linalg::Schur::try_new(comp, 1e-10, 100_000));
    let Some(schur) = schur else {
        return Vec::new();
    };
    schur
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() < 1e-6 * (1.0 + z.re.abs()))
        .map(|z| z.re)
        .collect()
}

fn polish(u: f64, v: f64, rho: f64, alpha: f64) -> Option<(f64, f64)> {
    let (mut u, mut v) = (u, v);
    for _ in 0..50 {
        let f = coupling_field(u, v, rho, alpha);
        if f[0].abs().max(f[1].abs()) < 1e-15 {
            break;
        }
        let j = coupling_jacobian(u, v, rho, alpha);
        let step = j.lu().solve(&nalgebra::Vector2::new(f[0], f[1]))?;
        u -= step[0];
        v -= step[1];
    }
    let f = coupling_field(u, v, rho, alpha);
    (f[0].abs().max(f[1].abs()) < 1e-11).then_some((u, v))
}

/// All real solutions of `G(u, v; rho, alpha) = 0`, tagged by stability.
///
/// For `alpha > 0` the first equation gives `v = u - g(u) / (4 alpha)`, and the
/// second becomes the degree-nine polynomial `g(u) + g(v(u)) = 0`.
pub fn bichromatic_equilibria(rho: f64, alpha: f64) -> Vec<Equilibrium> {
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    let cubic = [-rho, 1.0, rho, -1.0];
    if alpha == 0.0 {
        for u in [-1.0, rho, 1.0] {
            for v in [-1.0, rho, 1.0] {
                pairs.push((u, v));
            }
        }
    } else {
        let inv = 1.0 / (4.0 * alpha);
        let v_of_u = poly_add(&[0.0, 1.0], &cubic, -inv);
        let v2 = poly_mul(&v_of_u, &v_of_u);
        let v3 = poly_mul(&v2, &v_of_u);
        // g(v) = -v^3 + rho v^2 + v - rho
        let mut g_of_v = poly_add(&poly_add(&v_of_u, &v3, -1.0), &v2, rho);
        g_of_v[0] -= rho;
        let resultant = poly_add(&g_of_v, &cubic, 1.0);
        for u in real_roots(&resultant) {
            let v = v_of_u.iter().rev().fold(0.0, |acc, c| acc * u + c);
            if let Some(p) = polish(u, v, rho, alpha) {
                pairs.push(p);
            }
        }
        for u in [-1.0, rho, 1.0] {
            pairs.push((u, u));
        }
    }
    let mut out: Vec<Equilibrium> = Vec::new();
    for (u, v) in pairs {
        if out.iter().any(|e| (e.u - u).abs() < 1e-8 && (e.v - v).abs() < 1e-8) {
            continue;
        }
        let rate = growth_rate(u, v, rho, alpha);
        out.push(Equilibrium { u, v, stable: rate < 0.0, growth_rate: rate });
    }
    out.sort_by(|a, b| a.u.partial_cmp(&b.u).unwrap().then(a.v.partial_cmp(&b.v).unwrap()));
    out
}

/// Stable checkerboard equilibria strictly inside `(-1, 1)^2`, ordered with `u < v` first.
pub fn stable_checkerboards(rho: f64, alpha: f64) -> Vec<Equilibrium> {
    let mut eqs: Vec<Equilibrium> = bichromatic_equilibria(rho, alpha)
        .into_iter()
        .filter(|e| e.stable && e.is_checkerboard() && e.in_open_square())
        .collect();
    eqs.sort_by(|a, b| (a.u - a.v).partial_cmp(&(b.u - b.v)).unwrap());
    eqs
}

/// Far-field limits for a wave of the given connection at `params`.
///
/// Checkerboard limits are tracked from `prev_*` by choosing the nearest stable
/// checkerboard, so continuation stays on one equilibrium branch.
pub fn limits_for(
    params: &WaveParams,
    connection: Connection,
    prev_left: &[f64],
    prev_right: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    match connection {
        Connection::Monochromatic => Ok((vec![-1.0], vec![1.0])),
        Connection::Lower | Connection::Upper => {
            let prev = if connection == Connection::Lower { prev_right } else { prev_left };
            let eqs = stable_checkerboards(params.rho, params.alpha);
            let best = eqs
                .iter()
                .min_by(|a, b| {
                    let da = (a.u - prev[0]).powi(2) + (a.v - prev[1]).powi(2);
                    let db = (b.u - prev[0]).powi(2) + (b.v - prev[1]).powi(2);
                    da.partial_cmp(&db).unwrap()
                })
                .ok_or_else(|| missing_equilibrium(params))?;
            let bc = vec![best.u, best.v];
            Ok(match connection {
                Connection::Lower => (vec![-1.0, -1.0], bc),
                _ => (bc, vec![1.0, 1.0]),
            })
        }
    }
}

fn missing_equilibrium(params: &WaveParams) -> Error {
    Error::Hypothesis(format!(
        "no stable checkerboard equilibrium in (-1, 1)^2 at rho = {}, alpha = {}",
        params.rho, params.alpha
    ))
}

/// Two-component Newton solve of `c Phi' = gamma Phi'' + alpha J Delta Phi + G(Phi)`.
pub fn solve_bichromatic_wave(
    params: &WaveParams,
    connection: Connection,
    guess: Option<&InitialGuess>,
    grid: crate::grid::Grid,
    opts: &SolverOptions,
) -> Result<WaveSolution> {
    params.validate()?;
    if params.model != Model::Bichromatic || connection == Connection::Monochromatic {
        return Err(Error::Config("bichromatic solve needs the bichromatic model and a lower/upper connection".into()));
    }
    let eq = stable_checkerboards(params.rho, params.alpha).into_iter().next().ok_or_else(|| missing_equilibrium(params))?;
    let (left, right) = match connection {
        Connection::Lower => (vec![-1.0, -1.0], vec![eq.u, eq.v]),
        _ => (vec![eq.u, eq.v], vec![1.0, 1.0]),
    };
    if let Some(g) = guess {
        return solve_with_connection(params, connection, g, opts);
    }
    // Without a speed estimate the advection direction is unknown; try both.
    let mut last = None;
    for c in [0.0, -0.1, 0.1] {
        let mut g = InitialGuess::tanh(grid, &left, &right);
        g.c = c;
        match solve_with_connection(params, connection, &g, opts) {
            Ok(sol) if c == 0.0 || sol.c() * c >= 0.0 => return Ok(sol),
            Ok(_) => {}
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or(Error::NonConvergence { iterations: opts.max_iters, residual: f64::NAN }))
}
