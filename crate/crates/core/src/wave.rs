//! Newton solves and natural-parameter continuation for the regularized
//! travelling-wave equations, together with the adjoint eigenfunction and the
//! first-order eigenfunction corrector.

use serde::{Deserialize, Serialize};

use crate::banded::{dot, BandLu, BandMatrix, Border, BorderedSolver};
use crate::bichromatic::{self, Connection};
use crate::dispersion::apply_a1;
use crate::error::{Error, Result};
use crate::grid::{Grid, Profile};
use crate::model::{Model, WaveParams};
use crate::operator::{from_interleaved, to_interleaved, WaveOperator};

/// Speeds below this magnitude, combined with a stalled Newton iteration, signal pinning.
pub const PINNING_SPEED: f64 = 1e-4;
pub const MAX_BISECTIONS: usize = 8;
/// Eigenvalue separation below which the adjoint kernel counts as degenerate.
pub const KERNEL_GAP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Max-norm residual tolerance.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iters: 50 }
    }
}

/// Starting point for Newton's method.
#[derive(Debug, Clone)]
pub struct InitialGuess {
    pub phi: Profile,
    pub c: f64,
}

impl InitialGuess {
    /// `(u- + u+)/2 + (u+ - u-)/2 tanh(xi)` per component, `c = 0`.
    pub fn tanh(grid: Grid, left: &[f64], right: &[f64]) -> Self {
        let mut values = Vec::with_capacity(grid.len() * left.len());
        for (l, r) in left.iter().zip(right) {
            values.extend(grid.nodes().map(|x| 0.5 * (l + r) + 0.5 * (r - l) * x.tanh()));
        }
        let phi = Profile::new(grid, left.len(), values, left.to_vec(), right.to_vec()).expect("tanh guess shape");
        Self { phi, c: 0.0 }
    }

    pub fn monochromatic(grid: Grid) -> Self {
        Self::tanh(grid, &[-1.0], &[1.0])
    }
}

/// Extra scalar equation removing translation invariance.
#[derive(Debug, Clone)]
pub enum PhaseCondition {
    /// `Phi_component(xi_node) = value`.
    Pin { node: usize, component: usize, value: f64 },
    /// `<Phi_ref', Phi - Phi_ref> = 0`.
    Integral { reference: Profile },
}

/// Spectral diagnostics recorded while computing the adjoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjointDiagnostics {
    /// Magnitude of the eigenvalue closest to zero, from inverse iteration.
    pub smallest_eigenvalue: f64,
    /// Magnitude estimate of the next eigenvalue.
    pub second_eigenvalue: f64,
    /// Max-norm gap between the transpose null vector and the direct adjoint discretization.
    pub direct_discrepancy: f64,
}

/// Converged travelling wave with its adjoint and, optionally, the corrector.
#[derive(Debug, Clone)]
pub struct WaveSolution {
    params: WaveParams,
    connection: Connection,
    c: f64,
    phi: Profile,
    psi: Profile,
    corrector: Option<Profile>,
    residual_norm: f64,
    iterations: usize,
    adjoint: AdjointDiagnostics,
    upwind: f64,
}

impl WaveSolution {
    pub fn params(&self) -> &WaveParams {
        &self.params
    }

    pub fn connection(&self) -> Connection {
        self.connection
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn phi(&self) -> &Profile {
        &self.phi
    }

    pub fn psi(&self) -> &Profile {
        &self.psi
    }

    pub fn corrector(&self) -> Option<&Profile> {
        self.corrector.as_ref()
    }

    pub fn residual_norm(&self) -> f64 {
        self.residual_norm
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn adjoint_diagnostics(&self) -> &AdjointDiagnostics {
        &self.adjoint
    }

    pub fn grid(&self) -> &Grid {
        self.phi.grid()
    }

    /// `Phi'` by central differences.
    pub fn dphi(&self) -> Profile {
        self.phi.diff1()
    }

    pub fn operator(&self) -> WaveOperator {
        WaveOperator::new(
            *self.grid(),
            self.params,
            self.phi.left_limit().to_vec(),
            self.phi.right_limit().to_vec(),
        )
        .with_reference_speed(self.upwind)
    }

    /// Copy carrying the corrector; computes it if absent.
    pub fn with_corrector(mut self) -> Result<Self> {
        if self.corrector.is_none() {
            self.corrector = Some(solve_corrector(&self)?);
        }
        Ok(self)
    }

    pub fn initial_guess(&self) -> InitialGuess {
        InitialGuess { phi: self.phi.clone(), c: self.c }
    }
}

/// Discrete residual of the travelling-wave equation at `(phi, c)`.
pub fn residual(phi: &Profile, c: f64, params: &WaveParams) -> Vec<f64> {
    let op = WaveOperator::new(*phi.grid(), *params, phi.left_limit().to_vec(), phi.right_limit().to_vec())
        .with_reference_speed(c);
    op.residual(phi.values(), c)
}

/// Solves the monochromatic wave equation from `guess` (default: tanh ramp, `c = 0`).
pub fn solve_wave(params: &WaveParams, guess: &InitialGuess, opts: &SolverOptions) -> Result<WaveSolution> {
    params.validate()?;
    if params.model != Model::Monochromatic {
        return Err(Error::Config("use solve_bichromatic_wave for the bichromatic model".into()));
    }
    match solve_with_connection(params, Connection::Monochromatic, guess, opts) {
        Err(Error::NonConvergence { .. }) if guess.c == 0.0 && params.rho != 0.0 => {
            // Retry from the continuum front `tanh(a xi)`, `c = -rho sqrt(2 k)`.
            let k = params.model.reaction_scale();
            let a = (0.5 * k).sqrt();
            let grid = *guess.phi.grid();
            let phi = guess.phi.with_values(grid.nodes().map(|x| (a * x).tanh()).collect());
            let retry = InitialGuess { phi, c: -params.rho * (2.0 * k).sqrt() };
            match solve_with_connection(params, Connection::Monochromatic, &retry, opts) {
                Err(err @ Error::NonConvergence { .. }) => Err(pinned_or(params, guess, opts, err)),
                other => other,
            }
        }
        other => other,
    }
}

/// Reports pinning when a standing (`c = 0`) front exists, `err` otherwise.
fn pinned_or(params: &WaveParams, guess: &InitialGuess, opts: &SolverOptions, err: Error) -> Error {
    let phi = &guess.phi;
    let op = WaveOperator::new(*phi.grid(), *params, phi.left_limit().to_vec(), phi.right_limit().to_vec())
        .with_reference_speed(0.0);
    match newton_pinned(&op, phi.values(), opts) {
        Ok(_) => Error::Pinned { speed: 0.0 },
        Err(_) => err,
    }
}

pub(crate) fn solve_with_connection(
    params: &WaveParams,
    connection: Connection,
    guess: &InitialGuess,
    opts: &SolverOptions,
) -> Result<WaveSolution> {
    let grid = *guess.phi.grid();
    let mut op = WaveOperator::new(grid, *params, guess.phi.left_limit().to_vec(), guess.phi.right_limit().to_vec());
    if guess.c != 0.0 {
        op = op.with_reference_speed(guess.c);
    }
    let node = grid.center();
    // Pin the component with the largest jump at the midpoint of its limits.
    let (left, right) = (guess.phi.left_limit(), guess.phi.right_limit());
    let component = (0..left.len())
        .max_by(|a, b| (right[*a] - left[*a]).abs().total_cmp(&(right[*b] - left[*b]).abs()))
        .unwrap_or(0);
    let value = 0.5 * (left[component] + right[component]);
    let phase = PhaseCondition::Pin { node, component, value };
    let (mut phi, mut c, mut residual_norm, mut iterations) =
        newton_or_pinned(&op, guess.phi.values(), guess.c, &phase, opts)?;
    if op.upwind() == 0.0 && c.abs() >= PINNING_SPEED {
        // No direction was known in advance: redo the solve upwinded.
        op = op.with_reference_speed(c);
        let (p, s, r, it) = newton(&op, &phi, c, &phase, opts)?;
        (phi, c, residual_norm, iterations) = (p, s, r, iterations + it);
    }
    finish(op, connection, phi, c, residual_norm, iterations)
}

fn finish(
    op: WaveOperator,
    connection: Connection,
    phi: Vec<f64>,
    c: f64,
    residual_norm: f64,
    iterations: usize,
) -> Result<WaveSolution> {
    let phi = op.profile(phi);
    let (psi, adjoint) = match compute_adjoint(&op, &phi, c) {
        Ok(found) => found,
        // A pinned wave has no translation kernel. At c = 0 the linearization is
        // symmetric, so fall back to the normalized derivative.
        Err(Error::DegenerateKernel { .. }) if c.abs() < PINNING_SPEED => {
            let dphi = phi.diff1();
            let norm = dphi.quad_inner(&dphi)?;
            let psi = dphi.scale(1.0 / norm);
            let nan = f64::NAN;
            (psi, AdjointDiagnostics { smallest_eigenvalue: nan, second_eigenvalue: nan, direct_discrepancy: nan })
        }
        Err(err) => return Err(err),
    };
    Ok(WaveSolution {
        params: *op.params(),
        connection,
        c,
        phi,
        psi,
        corrector: None,
        residual_norm,
        iterations,
        adjoint,
        upwind: op.upwind(),
    })
}

/// Damped Newton iteration on `(Phi, c)` with one phase row.
pub(crate) fn newton(
    op: &WaveOperator,
    phi0: &[f64],
    c0: f64,
    phase: &PhaseCondition,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, f64, f64, usize)> {
    let grid = *op.grid();
    let d = op.components();
    let n = grid.len();
    let weights = grid.weights();

    let phase_row: Vec<f64>;
    let phase_target: f64;
    match phase {
        PhaseCondition::Pin { node, component, value } => {
            let mut row = vec![0.0; n * d];
            row[op.index(*node, *component)] = 1.0;
            phase_row = row;
            phase_target = *value;
        }
        PhaseCondition::Integral { reference } => {
            let dref = reference.diff1();
            let mut row_cm = dref.into_values();
            for a in 0..d {
                for k in 0..n {
                    row_cm[a * n + k] *= weights[k];
                }
            }
            phase_target = dot(&row_cm, reference.values());
            phase_row = to_interleaved(&row_cm, d);
        }
    }

    let eval = |phi: &[f64], c: f64| -> (Vec<f64>, f64, f64) {
        let r = op.residual(phi, c);
        let p = dot(&phase_row, &to_interleaved(phi, d)) - phase_target;
        let norm = r.iter().fold(p.abs(), |m, v| m.max(v.abs()));
        (r, p, norm)
    };

    let mut phi = phi0.to_vec();
    let mut c = c0;
    let (mut r, mut p, mut norm) = eval(&phi, c);
    let mut iterations = 0;
    while norm >= opts.tol {
        if iterations >= opts.max_iters || !norm.is_finite() {
            return Err(stall_error(iterations, norm, c));
        }
        iterations += 1;
        let jac = op.jacobian(&phi, c);
        let dc = to_interleaved(&op.speed_derivative(&phi), d);
        let pivot = argmax_abs(&dc);
        let border = Border {
            columns: vec![dc],
            rows: vec![phase_row.clone()],
            corner: vec![0.0],
        };
        let solver = match BorderedSolver::new(&jac, border, pivot) {
            Ok(s) => s,
            Err(_) => return Err(stall_error(iterations, norm, c)),
        };
        let rhs: Vec<f64> = to_interleaved(&r, d).iter().map(|v| -v).collect();
        let (dx, dy) = solver.solve_refined(&rhs, &[-p], 2)?;
        let dx = from_interleaved(&dx, d);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let trial: Vec<f64> = phi.iter().zip(&dx).map(|(v, s)| v + step * s).collect();
            let trial_c = c + step * dy[0];
            let (tr, tp, tn) = eval(&trial, trial_c);
            if tn.is_finite() && (tn < norm * (1.0 - 1e-4 * step) || tn < opts.tol) {
                phi = trial;
                c = trial_c;
                r = tr;
                p = tp;
                norm = tn;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(stall_error(iterations, norm, c));
        }
    }
    Ok((phi, c, norm, iterations))
}

/// Newton on `Phi` alone at `c = 0`, used once the speed Newton stalls in the pinned regime.
fn newton_pinned(op: &WaveOperator, phi0: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, f64, usize)> {
    let d = op.components();
    let mut phi = phi0.to_vec();
    let mut r = op.residual(&phi, 0.0);
    let mut norm = max_abs(&r);
    let mut iterations = 0;
    while norm >= opts.tol {
        if iterations >= opts.max_iters || !norm.is_finite() {
            return Err(Error::Pinned { speed: 0.0 });
        }
        iterations += 1;
        let lu = op.jacobian(&phi, 0.0).factor().map_err(|_| Error::Pinned { speed: 0.0 })?;
        let dx = from_interleaved(&lu.solve(&to_interleaved(&r, d)), d);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let trial: Vec<f64> = phi.iter().zip(&dx).map(|(v, s)| v - step * s).collect();
            let tr = op.residual(&trial, 0.0);
            let tn = max_abs(&tr);
            if tn.is_finite() && (tn < norm * (1.0 - 1e-4 * step) || tn < opts.tol) {
                (phi, r, norm, accepted) = (trial, tr, tn, true);
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::Pinned { speed: 0.0 });
        }
    }
    Ok((phi, norm, iterations))
}

/// [`newton`], falling back to a standing (`c = 0`) solve when it stalls at small speed.
fn newton_or_pinned(
    op: &WaveOperator,
    phi0: &[f64],
    c0: f64,
    phase: &PhaseCondition,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, f64, f64, usize)> {
    match newton(op, phi0, c0, phase, opts) {
        Err(Error::Pinned { speed }) => match newton_pinned(op, phi0, opts) {
            Ok((phi, norm, it)) => Ok((phi, 0.0, norm, it)),
            Err(_) => Err(Error::Pinned { speed }),
        },
        other => other,
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn stall_error(iterations: usize, residual: f64, c: f64) -> Error {
    if c.abs() < PINNING_SPEED {
        Error::Pinned { speed: c.abs() }
    } else {
        Error::NonConvergence { iterations, residual }
    }
}

fn argmax_abs(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, -1.0), |(bi, bv), (i, x)| if x.abs() > bv { (i, x.abs()) } else { (bi, bv) })
        .0
}

fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn factor_with_fallback(m: BandMatrix) -> Result<BandLu> {
    match m.clone().factor() {
        Ok(lu) => Ok(lu),
        Err(_) => {
            // Exactly singular in floating point: nudge the diagonal.
            let mut nudged = m;
            let n = nudged.size();
            let scale = (0..n).map(|i| nudged.get(i, i).abs()).fold(0.0, f64::max).max(1.0);
            for i in 0..n {
                nudged.add(i, i, 1e-14 * scale);
            }
            nudged.factor()
        }
    }
}

/// Inverse iteration towards the eigenvector of smallest magnitude.
fn inverse_iteration(lu: &BandLu, start: &[f64], project: Option<(&[f64], &[f64])>, iters: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = start.to_vec();
    let proj = |w: &mut Vec<f64>| {
        if let Some((left, right)) = project {
            // remove the component along `right` in the biorthogonal sense
            let s = dot(left, w) / dot(left, right);
            for (wi, ri) in w.iter_mut().zip(right) {
                *wi -= s * ri;
            }
        }
    };
    proj(&mut v);
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut ratios = Vec::with_capacity(iters);
    for _ in 0..iters {
        let mut z = lu.solve(&v);
        proj(&mut z);
        let nz = norm2(&z);
        if nz == 0.0 || !nz.is_finite() {
            break;
        }
        ratios.push(1.0 / nz);
        z.iter_mut().for_each(|x| *x /= nz);
        if dot(&z, &v) < 0.0 {
            z.iter_mut().for_each(|x| *x = -*x);
        }
        let change = z.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = z;
        if project.is_none() && change < 1e-14 {
            break;
        }
    }
    (v, ratios)
}

/// Adjoint eigenfunction normalized by `<psi, Phi'> = 1`.
pub fn solve_adjoint(sol: &WaveSolution) -> Result<Profile> {
    compute_adjoint(&sol.operator(), &sol.phi, sol.c).map(|(psi, _)| psi)
}

pub(crate) fn compute_adjoint(op: &WaveOperator, phi: &Profile, c: f64) -> Result<(Profile, AdjointDiagnostics)> {
    let grid = *op.grid();
    let d = op.components();
    let n = grid.len();
    let h = grid.spacing();
    let weights = grid.weights();
    let dphi_cm = phi.diff1().into_values();
    let dphi = to_interleaved(&dphi_cm, d);

    // The adjoint decays slowly where g'(u+) is small, and the zero extension
    // implied by the transpose distorts it within one shift of the boundary.
    // Solve on a padded copy of the problem and keep the original window.
    let pad = (0.5 * grid.half_width() / h).round().max(1.0) as usize;
    let wide = Grid::new(grid.half_width() + pad as f64 * h, h)?;
    let nw = wide.len();
    let (left, right) = op.limits();
    let mut wide_cm = Vec::with_capacity(nw * d);
    for a in 0..d {
        wide_cm.extend(std::iter::repeat(left[a]).take(pad));
        wide_cm.extend_from_slice(phi.component(a));
        wide_cm.extend(std::iter::repeat(right[a]).take(pad));
    }
    let wide_op = WaveOperator::new(wide, *op.params(), left.to_vec(), right.to_vec()).with_reference_speed(op.upwind());
    let embed = |v_cm: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; nw * d];
        for a in 0..d {
            out[a * nw + pad..a * nw + pad + n].copy_from_slice(&v_cm[a * n..(a + 1) * n]);
        }
        to_interleaved(&out, d)
    };
    let restrict = |v_il: &[f64]| -> Vec<f64> {
        let v_cm = from_interleaved(v_il, d);
        let mut out = Vec::with_capacity(n * d);
        for a in 0..d {
            out.extend_from_slice(&v_cm[a * nw + pad..a * nw + pad + n]);
        }
        to_interleaved(&out, d)
    };

    let jac = wide_op.jacobian(&wide_cm, c);
    let wide_dphi = embed(&dphi_cm);
    let lu_t = factor_with_fallback(jac.transpose())?;
    let (y, r0) = inverse_iteration(&lu_t, &wide_dphi, None, 40);
    let mu0 = r0.last().copied().unwrap_or(0.0);

    // Right null vector of A for the biorthogonal projection.
    let lu = factor_with_fallback(jac.clone())?;
    let (x0, _) = inverse_iteration(&lu, &wide_dphi, None, 40);
    let probe: Vec<f64> = (0..nw * d).map(|i| ((i as f64) * 0.7548776662).fract() - 0.5).collect();
    let (_, ratios) = inverse_iteration(&lu_t, &probe, Some((&x0, &y)), 60);
    let tail = &ratios[ratios.len().saturating_sub(12)..];
    let mu1 = if tail.is_empty() {
        f64::INFINITY
    } else {
        (tail.iter().map(|r| r.ln()).sum::<f64>() / tail.len() as f64).exp()
    };
    if mu1 - mu0 <= KERNEL_GAP {
        return Err(Error::DegenerateKernel { smallest: mu0, second: mu1 });
    }

    // Interior trapezoid weights are all h, so y / h samples psi.
    let raw = restrict(&y);
    let psi_cm = from_interleaved(&raw, d);
    let psi = Profile::new(grid, d, psi_cm, vec![0.0; d], vec![0.0; d])?;
    let scale = psi.quad_inner(&phi.diff1())?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Singular("adjoint orthogonal to Phi'"));
    }
    let psi = psi.scale(1.0 / scale);

    // Cross-check: null vector of the directly discretized adjoint equation.
    let direct = factor_with_fallback(wide_op.adjoint_discretization(&wide_cm, c))?;
    let (q, _) = inverse_iteration(&direct, &y, None, 40);
    let q = Profile::new(grid, d, from_interleaved(&restrict(&q), d), vec![0.0; d], vec![0.0; d])?;
    let qs = q.quad_inner(&phi.diff1())?;
    let psi_max = psi.max_abs().max(f64::MIN_POSITIVE);
    let discrepancy =
        q.values().iter().zip(psi.values()).map(|(a, b)| (a / qs - b).abs()).fold(0.0, f64::max) / psi_max;
    let _ = (&dphi, &weights);

    Ok((
        psi,
        AdjointDiagnostics { smallest_eigenvalue: mu0, second_eigenvalue: mu1, direct_discrepancy: discrepancy },
    ))
}

/// Solves `L_0 p = -A_1 Phi' + c_g Phi'` with `<psi, p> = 0` via a bordered system.
pub fn solve_corrector(sol: &WaveSolution) -> Result<Profile> {
    let op = sol.operator();
    let d = op.components();
    let grid = *sol.grid();
    let n = grid.len();
    let weights = grid.weights();
    let dphi = sol.dphi();
    let a1 = apply_a1(sol, &dphi)?;
    let cg = sol.psi.quad_inner(&a1)?;
    let rhs_cm: Vec<f64> = a1.values().iter().zip(dphi.values()).map(|(a, p)| -a + cg * p).collect();
    let rhs_profile = dphi.with_values(rhs_cm.clone());
    let orth = sol.psi.quad_inner(&rhs_profile)?;
    let rhs_scale = rhs_profile.max_abs().max(1.0);
    if orth.abs() > 1e-8 * rhs_scale {
        return Err(Error::Singular("corrector right-hand side not orthogonal to the adjoint"));
    }
    let jac = op.jacobian(sol.phi.values(), sol.c);
    let mut psi_w = sol.psi.values().to_vec();
    for a in 0..d {
        for k in 0..n {
            psi_w[a * n + k] *= weights[k];
        }
    }
    let dphi_il = to_interleaved(dphi.values(), d);
    let border = Border { columns: vec![dphi_il.clone()], rows: vec![to_interleaved(&psi_w, d)], corner: vec![0.0] };
    let solver = BorderedSolver::new(&jac, border, argmax_abs(&dphi_il))
        .map_err(|_| Error::Singular("corrector bordered system"))?;
    let (x, _mu) = solver.solve(&to_interleaved(&rhs_cm, d), &[0.0])?;
    Ok(dphi.with_values(from_interleaved(&x, d)))
}

/// Outcome of a continuation run.
#[derive(Debug, Clone)]
pub struct Branch {
    pub solutions: Vec<WaveSolution>,
    /// Set when continuation stopped in the pinned regime.
    pub pinned: bool,
    /// Index into the requested path at which the branch stopped, with the cause.
    pub failure: Option<(usize, Error)>,
}

impl Branch {
    pub fn last(&self) -> Option<&WaveSolution> {
        self.solutions.last()
    }
}

fn lerp_params(a: &WaveParams, b: &WaveParams, t: f64) -> WaveParams {
    WaveParams {
        rho: a.rho + t * (b.rho - a.rho),
        zeta: a.zeta + t * (b.zeta - a.zeta),
        alpha: a.alpha + t * (b.alpha - a.alpha),
        gamma: a.gamma + t * (b.gamma - a.gamma),
        model: b.model,
    }
}

/// One warm-started step to `target`, using the integral phase condition.
pub fn continuation_step(prev: &WaveSolution, target: &WaveParams, opts: &SolverOptions) -> Result<WaveSolution> {
    target.validate()?;
    let (left, right) = bichromatic::limits_for(target, prev.connection, prev.phi.left_limit(), prev.phi.right_limit())?;
    let reference = if prev.c != 0.0 { prev.c } else { prev.upwind };
    let op = WaveOperator::new(*prev.grid(), *target, left.clone(), right.clone()).with_reference_speed(reference);
    let guess = Profile::new(*prev.grid(), op.components(), prev.phi.values().to_vec(), left, right)?;
    let phase = PhaseCondition::Integral { reference: guess.clone() };
    let (phi, c, res, it) = newton_or_pinned(&op, guess.values(), prev.c, &phase, opts)?;
    finish(op, prev.connection, phi, c, res, it)
}

/// Natural-parameter continuation along `path`, starting from `start`.
///
/// A failed step is bisected up to [`MAX_BISECTIONS`] times. The branch stops
/// early, with `pinned` set, once the speed drops below [`PINNING_SPEED`] and
/// Newton stalls or the converged speed itself falls below that threshold.
pub fn continue_in(path: &[WaveParams], start: &WaveSolution, opts: &SolverOptions) -> Branch {
    let mut solutions: Vec<WaveSolution> = Vec::with_capacity(path.len());
    let mut current = start.clone();
    for (idx, target) in path.iter().enumerate() {
        if *target == current.params {
            solutions.push(current.clone());
            continue;
        }
        let origin = current.params;
        let mut reached: f64 = 0.0;
        let mut step: f64 = 1.0;
        let mut halvings = 0;
        loop {
            let t = (reached + step).min(1.0);
            let trial = lerp_params(&origin, target, t);
            match continuation_step(&current, &trial, opts) {
                Ok(sol) => {
                    if sol.c.abs() < PINNING_SPEED && start.c.abs() >= PINNING_SPEED {
                        solutions.push(sol);
                        return Branch { solutions, pinned: true, failure: Some((idx, Error::Pinned { speed: 0.0 })) };
                    }
                    current = sol;
                    reached = t;
                    if reached >= 1.0 {
                        break;
                    }
                }
                Err(err) => {
                    let pinned = matches!(err, Error::Pinned { .. });
                    halvings += 1;
                    if halvings > MAX_BISECTIONS {
                        return Branch { solutions, pinned, failure: Some((idx, err)) };
                    }
                    step *= 0.5;
                }
            }
        }
        current.params = *target;
        solutions.push(current.clone());
    }
    Branch { solutions, pinned: false, failure: None }
}
