//! Derivatives of the planar-wave dispersion relation at `z = 0`, angle
//! sweeps, the directional dispersion `d(phi) = c(zeta* + phi) / cos(phi)` and
//! a scan of the limiting characteristic functions.
//!
//! All linear shift operators act on the five-point stencil with the shift
//! order `(+cos, -cos, +sin, -sin)`; the bichromatic versions are
//! premultiplied by `alpha J`, where `J` swaps the two components.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use nalgebra::{Complex, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Profile;
use crate::model::{Model, WaveParams};
use crate::wave::{continuation_step, continue_in, solve_corrector, SolverOptions, WaveSolution, PINNING_SPEED};

/// Angle increment of the finite-difference cross-checks.
pub const FD_STEP: f64 = PI / 720.0;
/// Samples on each side of `zeta*` used by the quadratic fit of `d`.
pub const FIT_HALF_WIDTH: usize = 5;
const SPECIAL_ANGLE_TOL: f64 = 1e-12;
const BISECTION_TOL: f64 = 1e-12;

/// How a reported number was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    AnalyticFormula,
    FiniteDifference,
    SpecialCase,
    /// Measured by direct lattice simulation.
    SimulationMeasured,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::AnalyticFormula => "analytic-formula",
            Method::FiniteDifference => "finite-difference",
            Method::SpecialCase => "special-case",
            Method::SimulationMeasured => "simulation-measured",
        }
    }
}

/// Lattice directions `zeta = k pi / 4` where `A_1` vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialAngle {
    /// Multiples of `pi / 2`.
    Horizontal,
    /// Odd multiples of `pi / 4`.
    Diagonal,
}

pub fn special_angle(zeta: f64) -> Option<SpecialAngle> {
    let r = zeta.rem_euclid(FRAC_PI_2);
    if r < SPECIAL_ANGLE_TOL || FRAC_PI_2 - r < SPECIAL_ANGLE_TOL {
        Some(SpecialAngle::Horizontal)
    } else if (r - FRAC_PI_4).abs() < SPECIAL_ANGLE_TOL {
        Some(SpecialAngle::Diagonal)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CornerKind {
    Interior,
    Exterior,
}

/// Interior corners need `kappa_d` of the same sign as `c`
/// (`kappa_d < 0` for `rho > 0`); the `rho < 0` case follows by antisymmetry.
pub fn classify_corner(c: f64, kappa_d: f64) -> Option<CornerKind> {
    if c == 0.0 || kappa_d == 0.0 {
        None
    } else if c * kappa_d > 0.0 {
        Some(CornerKind::Interior)
    } else {
        Some(CornerKind::Exterior)
    }
}

fn check_shape(sol: &WaveSolution, p: &Profile) -> Result<()> {
    if p.same_shape(sol.phi()) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Multiplies by `alpha J` for the bichromatic model.
fn lattice_factor(params: &WaveParams, p: Profile) -> Profile {
    match params.model {
        Model::Monochromatic => p,
        Model::Bichromatic => p.swap_components().scale(params.alpha),
    }
}

fn shift_combination(sol: &WaveSolution, p: &Profile, coeffs: [f64; 4]) -> Result<Profile> {
    check_shape(sol, p)?;
    let params = sol.params();
    let mut acc = p.scale(0.0);
    for (s, w) in params.shifts().iter().zip(coeffs) {
        if w != 0.0 {
            acc = acc.axpy(w, &p.shift_sample(*s));
        }
    }
    Ok(lattice_factor(params, acc))
}

/// Sum of `weight * p(xi + shift)` followed by the lattice factor.
fn explicit_shifts(sol: &WaveSolution, terms: &[(f64, f64, &Profile)]) -> Profile {
    let mut acc = terms[0].2.scale(0.0);
    for (w, s, p) in terms {
        acc = acc.axpy(*w, &p.shift_sample(*s));
    }
    lattice_factor(sol.params(), acc)
}

/// `A_1 p = -+ sin(zeta) p(. +- cos zeta) +- cos(zeta) p(. +- sin zeta)`.
pub fn apply_a1(sol: &WaveSolution, p: &Profile) -> Result<Profile> {
    let (s, c) = sol.params().zeta.sin_cos();
    shift_combination(sol, p, [-s, s, c, -c])
}

/// `A_2 p = sin^2(zeta) p(. +- cos zeta) + cos^2(zeta) p(. +- sin zeta)`.
pub fn apply_a2(sol: &WaveSolution, p: &Profile) -> Result<Profile> {
    let (s, c) = sol.params().zeta.sin_cos();
    shift_combination(sol, p, [s * s, s * s, c * c, c * c])
}

/// `B_1 p = -+ cos(zeta) p(. +- cos zeta) -+ sin(zeta) p(. +- sin zeta)`.
pub fn apply_b1(sol: &WaveSolution, p: &Profile) -> Result<Profile> {
    let (s, c) = sol.params().zeta.sin_cos();
    shift_combination(sol, p, [-c, c, -s, s])
}

/// `[d_z lambda]_{z=0} = <psi, A_1 Phi'>`.
pub fn group_velocity(sol: &WaveSolution) -> Result<f64> {
    sol.psi().quad_inner(&apply_a1(sol, &sol.dphi())?)
}

fn corrector_of(sol: &WaveSolution) -> Result<Profile> {
    match sol.corrector() {
        Some(p) => Ok(p.clone()),
        None => solve_corrector(sol),
    }
}

/// Full `<psi, A_2 Phi' + 2 A_1 p> - 2 c_g <psi, p>` with `p` the corrector.
pub fn lambda_zz_generic(sol: &WaveSolution, corrector: &Profile) -> Result<f64> {
    let psi = sol.psi();
    let dphi = sol.dphi();
    let cg = group_velocity(sol)?;
    let main = apply_a2(sol, &dphi)?.axpy(2.0, &apply_a1(sol, corrector)?);
    Ok(psi.quad_inner(&main)? - 2.0 * cg * psi.quad_inner(corrector)?)
}

/// Closed forms at `zeta = k pi / 4`.
pub fn lambda_zz_special(sol: &WaveSolution) -> Option<f64> {
    let dphi = sol.dphi();
    let r = 0.5 * SQRT_2;
    let v = match special_angle(sol.params().zeta)? {
        SpecialAngle::Horizontal => lattice_factor(sol.params(), dphi.scale(2.0)),
        SpecialAngle::Diagonal => explicit_shifts(sol, &[(1.0, r, &dphi), (1.0, -r, &dphi)]),
    };
    sol.psi().quad_inner(&v).ok()
}

/// `[d_z^2 lambda]_{z=0}`, from the closed forms where they apply.
pub fn lambda_zz(sol: &WaveSolution) -> Result<(f64, Method)> {
    if let Some(v) = lambda_zz_special(sol) {
        return Ok((v, Method::SpecialCase));
    }
    Ok((lambda_zz_generic(sol, &corrector_of(sol)?)?, Method::AnalyticFormula))
}

/// The general second angular derivative of `c`, with `d_zeta Phi` equal to the corrector.
pub fn c_zetazeta_generic(sol: &WaveSolution, corrector: &Profile) -> Result<f64> {
    let psi = sol.psi();
    let phi = sol.phi();
    let dphi = sol.dphi();
    let g = sol.params().reaction();
    let curvature = corrector.with_values(
        phi.values().iter().zip(corrector.values()).map(|(u, p)| g.d2(*u) * p * p).collect(),
    );
    let dcorr = corrector.diff1();
    let cz = group_velocity(sol)?;
    let mut total = psi.quad_inner(&curvature)?;
    total += psi.quad_inner(&apply_a2(sol, &phi.diff2())?)?;
    total += psi.quad_inner(&apply_b1(sol, &dphi)?)?;
    total += 2.0 * psi.quad_inner(&apply_a1(sol, &dcorr)?)?;
    total -= 2.0 * cz * psi.quad_inner(&dcorr)?;
    Ok(total)
}

pub fn c_zetazeta_special(sol: &WaveSolution) -> Option<f64> {
    let dphi = sol.dphi();
    let ddphi = sol.phi().diff2();
    let v = match special_angle(sol.params().zeta)? {
        SpecialAngle::Horizontal => {
            explicit_shifts(sol, &[(2.0, 0.0, &ddphi), (1.0, -1.0, &dphi), (-1.0, 1.0, &dphi)])
        }
        SpecialAngle::Diagonal => {
            let r = 0.5 * SQRT_2;
            explicit_shifts(
                sol,
                &[(1.0, r, &ddphi), (1.0, -r, &ddphi), (SQRT_2, -r, &dphi), (-SQRT_2, r, &dphi)],
            )
        }
    };
    sol.psi().quad_inner(&v).ok()
}

/// `[d_zeta^2 c]`, from the closed forms where they apply.
pub fn c_zetazeta(sol: &WaveSolution) -> Result<(f64, Method)> {
    if let Some(v) = c_zetazeta_special(sol) {
        return Ok((v, Method::SpecialCase));
    }
    Ok((c_zetazeta_generic(sol, &corrector_of(sol)?)?, Method::AnalyticFormula))
}

/// `kappa_d = c + [d_zeta^2 c]`.
pub fn kappa_d(sol: &WaveSolution) -> Result<f64> {
    Ok(sol.c() + c_zetazeta(sol)?.0)
}

/// Five-point central differences `(c', c'')` in `zeta`, re-solving at each stencil angle.
pub fn angle_derivatives_fd(sol: &WaveSolution, step: f64, opts: &SolverOptions) -> Result<(f64, f64)> {
    let zeta = sol.params().zeta;
    let mut speeds = [0.0; 5];
    for (slot, k) in [-2i32, -1, 1, 2].iter().zip([0usize, 1, 3, 4]) {
        let target = sol.params().with_zeta(zeta + *slot as f64 * step);
        let near = continuation_step(sol, &sol.params().with_zeta(zeta + slot.signum() as f64 * step), opts)?;
        let s = if slot.abs() == 1 { near } else { continuation_step(&near, &target, opts)? };
        speeds[k] = s.c();
    }
    speeds[2] = sol.c();
    let [m2, m1, c0, p1, p2] = speeds;
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * step);
    let d2 = (-m2 + 16.0 * m1 - 30.0 * c0 + 16.0 * p1 - p2) / (12.0 * step * step);
    Ok((d1, d2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodTags {
    pub c_g: Method,
    pub lambda_zz: Method,
    pub c_zeta: Method,
    pub c_zetazeta: Method,
}

/// Every derivative quantity at one converged wave.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionReport {
    pub params: WaveParams,
    pub c: f64,
    pub c_g: f64,
    pub lambda_zz: f64,
    pub c_zeta: f64,
    pub c_zetazeta: f64,
    pub kappa_d: f64,
    /// Finite-difference companions, when requested.
    pub c_zeta_fd: Option<f64>,
    pub c_zetazeta_fd: Option<f64>,
    /// Max-norm of the eigenfunction corrector.
    pub corrector_norm: f64,
    pub methods: MethodTags,
    /// `lambda_zz > 0`, needed by the corner construction.
    pub lambda_zz_positive: bool,
    pub corner: Option<CornerKind>,
}

/// Computes the report; `finite_differences` adds the five-point angle stencil.
pub fn dispersion_report(sol: &WaveSolution, finite_differences: bool, opts: &SolverOptions) -> Result<DispersionReport> {
    let corrector = corrector_of(sol)?;
    let c_g = group_velocity(sol)?;
    let (lambda_zz, lz_method) = match lambda_zz_special(sol) {
        Some(v) => (v, Method::SpecialCase),
        None => (lambda_zz_generic(sol, &corrector)?, Method::AnalyticFormula),
    };
    let (c_zetazeta, czz_method) = match c_zetazeta_special(sol) {
        Some(v) => (v, Method::SpecialCase),
        None => (c_zetazeta_generic(sol, &corrector)?, Method::AnalyticFormula),
    };
    let fd = if finite_differences { Some(angle_derivatives_fd(sol, FD_STEP, opts)?) } else { None };
    let kappa_d = sol.c() + c_zetazeta;
    Ok(DispersionReport {
        params: *sol.params(),
        c: sol.c(),
        c_g,
        lambda_zz,
        // [d_zeta c] equals the group velocity.
        c_zeta: c_g,
        c_zetazeta,
        kappa_d,
        c_zeta_fd: fd.map(|f| f.0),
        c_zetazeta_fd: fd.map(|f| f.1),
        corrector_norm: corrector.max_abs(),
        methods: MethodTags { c_g: Method::AnalyticFormula, lambda_zz: lz_method, c_zeta: Method::AnalyticFormula, c_zetazeta: czz_method },
        lambda_zz_positive: lambda_zz > 0.0,
        corner: classify_corner(sol.c(), kappa_d),
    })
}

/// Reports along a continuation path, stopping at the first failure.
#[derive(Debug, Clone)]
pub struct ReportSweep {
    pub reports: Vec<DispersionReport>,
    pub pinned: bool,
    pub failure: Option<(usize, Error)>,
}

pub fn report_sweep(start: &WaveSolution, path: &[WaveParams], finite_differences: bool, opts: &SolverOptions) -> ReportSweep {
    let branch = continue_in(path, start, opts);
    let mut reports = Vec::with_capacity(branch.solutions.len());
    for (i, sol) in branch.solutions.iter().enumerate() {
        if sol.c().abs() < PINNING_SPEED {
            return ReportSweep { reports, pinned: true, failure: Some((i, Error::Pinned { speed: sol.c().abs() })) };
        }
        match dispersion_report(sol, finite_differences, opts) {
            Ok(r) => reports.push(r),
            Err(e) => return ReportSweep { reports, pinned: branch.pinned, failure: Some((i, e)) },
        }
    }
    ReportSweep { reports, pinned: branch.pinned, failure: branch.failure }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub zeta: f64,
    pub c: f64,
}

/// Tabulated `zeta -> c` branch on a uniform angle grid containing `zeta_star`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionCurve {
    pub params: WaveParams,
    pub zeta_star: f64,
    pub step: f64,
    pub samples: Vec<CurveSample>,
    /// Set when continuation stopped at a pinned wave.
    pub pinned: bool,
    pub failure: Option<String>,
}

impl DispersionCurve {
    /// Points `-c (cos zeta, sin zeta)` as `(zeta, x, y)`.
    pub fn polar(&self) -> Vec<[f64; 3]> {
        self.samples.iter().map(|s| [s.zeta, -s.c * s.zeta.cos(), -s.c * s.zeta.sin()]).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    /// Angles of strict interior local minima of `|c|`.
    pub fn speed_minima(&self) -> Vec<f64> {
        let a: Vec<f64> = self.samples.iter().map(|s| s.c.abs()).collect();
        (1..a.len().saturating_sub(1))
            .filter(|&k| a[k] < a[k - 1] && a[k] < a[k + 1])
            .map(|k| self.samples[k].zeta)
            .collect()
    }
}

/// Continuation in `zeta` from `start` over `range`, in steps of `step`.
///
/// Samples sit at `zeta* + k step` with `zeta*` the angle of `start`; the
/// branch is continued outwards in both directions.
pub fn angle_sweep(start: &WaveSolution, range: (f64, f64), step: f64, opts: &SolverOptions) -> Result<DispersionCurve> {
    let zeta_star = start.params().zeta;
    if !(step > 0.0) || range.0 > range.1 {
        return Err(Error::Config(format!("invalid angle sweep: range {range:?}, step {step}")));
    }
    if zeta_star < range.0 - 1e-12 || zeta_star > range.1 + 1e-12 {
        return Err(Error::Config(format!("start angle {zeta_star} outside sweep range {range:?}")));
    }
    let up = ((range.1 - zeta_star) / step + 1e-9).floor() as usize;
    let down = ((zeta_star - range.0) / step + 1e-9).floor() as usize;
    let path = |count: usize, sign: f64| -> Vec<WaveParams> {
        (1..=count).map(|k| start.params().with_zeta(zeta_star + sign * k as f64 * step)).collect()
    };
    let upper = continue_in(&path(up, 1.0), start, opts);
    let lower = continue_in(&path(down, -1.0), start, opts);
    let mut samples: Vec<CurveSample> =
        lower.solutions.iter().rev().map(|s| CurveSample { zeta: s.params().zeta, c: s.c() }).collect();
    samples.push(CurveSample { zeta: zeta_star, c: start.c() });
    samples.extend(upper.solutions.iter().map(|s| CurveSample { zeta: s.params().zeta, c: s.c() }));
    let failure = lower
        .failure
        .as_ref()
        .map(|(i, e)| format!("below zeta* at step {}: {e}", i + 1))
        .into_iter()
        .chain(upper.failure.as_ref().map(|(i, e)| format!("above zeta* at step {}: {e}", i + 1)))
        .reduce(|a, b| format!("{a}; {b}"));
    Ok(DispersionCurve {
        params: *start.params(),
        zeta_star,
        step,
        samples,
        pinned: lower.pinned || upper.pinned,
        failure,
    })
}

/// `d(phi) = c(zeta* + phi) / cos(phi)` with a local quadratic fit at `phi = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionalDispersion {
    pub zeta_star: f64,
    pub step: f64,
    pub phi: Vec<f64>,
    pub d: Vec<f64>,
    /// `d(0)`, the sampled `c(zeta*)`.
    pub d0: f64,
    /// Fitted `d'(0)` and `d''(0)`.
    pub d1: f64,
    pub d2: f64,
    /// Coefficients `a0 + a1 phi + a2 phi^2` of the fit.
    pub fit: [f64; 3],
}

impl DirectionalDispersion {
    /// Cubic Lagrange interpolation of the samples.
    pub fn eval(&self, phi: f64) -> f64 {
        let n = self.phi.len();
        if n < 4 {
            return self.d0;
        }
        let pos = (phi - self.phi[0]) / self.step;
        let base = (pos.floor() as i64 - 1).clamp(0, n as i64 - 4) as usize;
        let t = pos - base as f64 - 1.0;
        let w = [
            -t * (t - 1.0) * (t - 2.0) / 6.0,
            (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
            -(t + 1.0) * t * (t - 2.0) / 2.0,
            (t + 1.0) * t * (t - 1.0) / 6.0,
        ];
        (0..4).map(|m| w[m] * self.d[base + m]).sum()
    }

    pub fn phi_range(&self) -> (f64, f64) {
        (self.phi[0], self.phi[self.phi.len() - 1])
    }
}

pub fn directional_dispersion(curve: &DispersionCurve, zeta_star: f64) -> Result<DirectionalDispersion> {
    let step = curve.step;
    let center = curve
        .samples
        .iter()
        .position(|s| (s.zeta - zeta_star).abs() < 1e-9 * step.max(1.0))
        .ok_or_else(|| Error::Window(format!("zeta* = {zeta_star} is not a sample of the curve")))?;
    let below = center;
    let above = curve.samples.len() - 1 - center;
    if below < FIT_HALF_WIDTH || above < FIT_HALF_WIDTH {
        return Err(Error::Window(format!(
            "directional fit needs {FIT_HALF_WIDTH} samples on each side of zeta*, have {below} below and {above} above"
        )));
    }
    let phi: Vec<f64> = curve.samples.iter().map(|s| s.zeta - zeta_star).collect();
    let d: Vec<f64> = curve.samples.iter().zip(&phi).map(|(s, p)| s.c / p.cos()).collect();
    let mut normal = Matrix3::<f64>::zeros();
    let mut rhs = Vector3::<f64>::zeros();
    for k in center - FIT_HALF_WIDTH..=center + FIT_HALF_WIDTH {
        let basis = Vector3::new(1.0, phi[k], phi[k] * phi[k]);
        normal += basis * basis.transpose();
        rhs += basis * d[k];
    }
    let a = normal.lu().solve(&rhs).ok_or(Error::Singular("directional dispersion fit"))?;
    Ok(DirectionalDispersion {
        zeta_star,
        step,
        d0: d[center],
        d1: a[1],
        d2: 2.0 * a[2],
        fit: [a[0], a[1], a[2]],
        phi,
        d,
    })
}

/// Angles `phi- < 0 < phi+` with `d(phi+-) = c_target`.
pub fn corner_angles(dd: &DirectionalDispersion, c_target: f64) -> Result<(f64, f64)> {
    let gap = c_target - dd.d0;
    if gap == 0.0 {
        return Ok((0.0, 0.0));
    }
    if gap.signum() != dd.d2.signum() || dd.d2 == 0.0 {
        return Err(Error::NoCorner(format!(
            "sign(c - c*) = {} but sign(d'') = {} (c - c* = {gap:e}, d'' = {:e})",
            gap.signum(),
            dd.d2.signum(),
            dd.d2
        )));
    }
    let center = dd.phi.iter().position(|p| p.abs() < 1e-9 * dd.step.max(1.0)).unwrap_or(0);
    let sign = dd.d2.signum();
    let f = |phi: f64| (dd.eval(phi) - c_target) * sign;
    let mut roots = [0.0; 2];
    for (slot, dir) in [(0usize, -1i64), (1, 1)] {
        let mut k = center as i64;
        let mut bracket = None;
        loop {
            let next = k + dir;
            if next < 0 || next >= dd.phi.len() as i64 {
                break;
            }
            if f(dd.phi[next as usize]) >= 0.0 {
                bracket = Some((dd.phi[k as usize], dd.phi[next as usize]));
                break;
            }
            k = next;
        }
        let (mut inner, mut outer) = bracket.ok_or_else(|| {
            Error::Window(format!("c_target = {c_target} is not reached inside the sampled window {:?}", dd.phi_range()))
        })?;
        for _ in 0..200 {
            let mid = 0.5 * (inner + outer);
            let v = f(mid);
            if v >= 0.0 {
                outer = mid;
            } else {
                inner = mid;
            }
            if (outer - inner).abs() < BISECTION_TOL * dd.step || v.abs() < 1e-15 {
                break;
            }
        }
        roots[slot] = 0.5 * (inner + outer);
    }
    Ok((roots[0], roots[1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Minus,
    Plus,
}

/// Minimum modulus of `det Delta+-_{i omega}(i nu)` over a rectangular grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hs1Report {
    pub min_modulus: f64,
    pub argmin_omega: f64,
    pub argmin_nu: f64,
    pub argmin_side: Side,
    /// `det Delta-` and `det Delta+` at `omega = nu = 0`, as `[re, im]`.
    pub origin_minus: [f64; 2],
    pub origin_plus: [f64; 2],
    pub omega_points: usize,
    pub nu_points: usize,
    pub nu_max: f64,
}

/// Characteristic determinant of the linearization at the constant state `state`.
pub fn characteristic_det(params: &WaveParams, c: f64, state: &[f64], omega: f64, nu: f64) -> Complex<f64> {
    let (s, co) = params.zeta.sin_cos();
    let shifts = [co, -co, s, -s];
    let twists = [-s, s, co, -co];
    let mut e = Complex::new(0.0, 0.0);
    for (r, t) in shifts.iter().zip(twists) {
        e += Complex::from_polar(1.0, nu * r + omega * t);
    }
    let g = params.reaction();
    let adv = Complex::new(0.0, -c * nu);
    match params.model {
        Model::Monochromatic => adv + e - 4.0 + g.d1(state[0]),
        Model::Bichromatic => {
            let a = params.alpha;
            let d0 = adv - 4.0 * a + g.d1(state[0]);
            let d1 = adv - 4.0 * a + g.d1(state[1]);
            d0 * d1 - a * a * e * e
        }
    }
}

/// Scans `omega in [-pi, pi]`, `nu in [-nu_max, nu_max]` at both limits of `sol`.
pub fn hs1_scan(sol: &WaveSolution, omega_points: usize, nu_points: usize, nu_max: f64) -> Hs1Report {
    let params = sol.params();
    let left = sol.phi().left_limit();
    let right = sol.phi().right_limit();
    let grid = |k: usize, n: usize, lo: f64, hi: f64| if n < 2 { 0.5 * (lo + hi) } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 };
    let mut best = (f64::INFINITY, 0.0, 0.0, Side::Minus);
    for (side, state) in [(Side::Minus, left), (Side::Plus, right)] {
        for i in 0..omega_points {
            let omega = grid(i, omega_points, -PI, PI);
            for j in 0..nu_points {
                let nu = grid(j, nu_points, -nu_max, nu_max);
                let m = characteristic_det(params, sol.c(), state, omega, nu).norm();
                if m < best.0 {
                    best = (m, omega, nu, side);
                }
            }
        }
    }
    let om = characteristic_det(params, sol.c(), left, 0.0, 0.0);
    let op = characteristic_det(params, sol.c(), right, 0.0, 0.0);
    Hs1Report {
        min_modulus: best.0,
        argmin_omega: best.1,
        argmin_nu: best.2,
        argmin_side: best.3,
        origin_minus: [om.re, om.im],
        origin_plus: [op.re, op.im],
        omega_points,
        nu_points,
        nu_max,
    }
}
