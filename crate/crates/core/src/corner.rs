//! Leading-order reduced difference equation for travelling corners and its
//! heteroclinic solution.
//!
//! With `kappa_l = theta_{l+1} - theta_l` up to a drift, the corner interface
//! solves
//!
//! ```text
//! kappa_{l+1} = kappa_l + f_kappa(kappa_l),   f_kappa(k) = nu1 (c - c*) + nu2 k^2
//! theta_{l+1} = theta_l + f_theta(kappa_l)
//! ```
//!
//! with `nu1 = 2 / lambda_zz` and `nu2 = -d'' / lambda_zz`.

use serde::{Deserialize, Serialize};

use crate::dispersion::{classify_corner, corner_angles, directional_dispersion, CornerKind, DispersionCurve, DispersionReport};
use crate::error::{Error, Result};

/// Tolerance of the `c_g = 0` hypothesis.
pub const GROUP_VELOCITY_TOL: f64 = 1e-6;
/// Default half-length of the computed sequence.
pub const DEFAULT_L_SEQ: usize = 2000;
const MAX_L_SEQ: usize = 1 << 24;
/// Distance to the fixed points that the sequence ends must reach.
pub const END_TOL: f64 = 1e-10;
const PICARD_TOL: f64 = 1e-14;
const PICARD_STEPS: usize = 100;
const DEGENERATE_DPP: f64 = 1e-10;

/// Closure used for `f_theta`, whose `O(kappa^2)` coefficient is not known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ThetaClosure {
    /// `f_theta(k) = k + nu1 (c - c*)`.
    Leading,
    /// The affine map sending `kappa-+` to `tan(phi-+)` exactly.
    Anchored { tan_minus: f64, tan_plus: f64 },
}

impl ThetaClosure {
    pub fn tag(&self) -> &'static str {
        match self {
            ThetaClosure::Leading => "leading-order",
            ThetaClosure::Anchored { .. } => "anchored-affine",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedModel {
    pub c_star: f64,
    pub lambda_zz: f64,
    pub d_pp: f64,
    pub nu1: f64,
    pub nu2: f64,
    /// Target speed.
    pub c: f64,
    /// `c* + [d_zeta^2 c]` at the base angle.
    pub kappa_d: f64,
    pub closure: ThetaClosure,
}

impl ReducedModel {
    /// Builds the model; checks the vanishing group velocity and non-degenerate coefficients.
    pub fn new(c_star: f64, lambda_zz: f64, d_pp: f64, c: f64, c_g: f64, kappa_d: f64) -> Result<Self> {
        if !(c_g.abs() <= GROUP_VELOCITY_TOL) {
            return Err(Error::Hypothesis(format!(
                "group velocity c_g = {c_g:e} does not vanish (tolerance {GROUP_VELOCITY_TOL:e})"
            )));
        }
        if lambda_zz == 0.0 || !lambda_zz.is_finite() {
            return Err(Error::Hypothesis(format!("lambda_zz = {lambda_zz} must be finite and nonzero")));
        }
        if d_pp.abs() < DEGENERATE_DPP || !d_pp.is_finite() {
            return Err(Error::Hypothesis(format!("degenerate directional dispersion: d'' = {d_pp:e}")));
        }
        Ok(Self {
            c_star,
            lambda_zz,
            d_pp,
            nu1: 2.0 / lambda_zz,
            nu2: -d_pp / lambda_zz,
            c,
            kappa_d,
            closure: ThetaClosure::Leading,
        })
    }

    pub fn with_closure(mut self, closure: ThetaClosure) -> Self {
        self.closure = closure;
        self
    }

    /// Anchors `f_theta` at the corner angles `phi- < 0 < phi+`.
    pub fn anchored(self, phi_minus: f64, phi_plus: f64) -> Self {
        self.with_closure(ThetaClosure::Anchored { tan_minus: phi_minus.tan(), tan_plus: phi_plus.tan() })
    }

    pub fn detuning(&self) -> f64 {
        self.c - self.c_star
    }

    pub fn f_kappa(&self, kappa: f64) -> f64 {
        self.nu1 * self.detuning() + self.nu2 * kappa * kappa
    }

    /// Roots `kappa- < kappa+` of `f_kappa`, when `sign(c - c*) = sign(d'')`.
    pub fn kappa_roots(&self) -> Option<(f64, f64)> {
        let q = -self.nu1 * self.detuning() / self.nu2;
        if q > 0.0 {
            let r = q.sqrt();
            Some((-r, r))
        } else if q == 0.0 {
            Some((0.0, 0.0))
        } else {
            None
        }
    }

    pub fn f_theta(&self, kappa: f64) -> f64 {
        match self.closure {
            ThetaClosure::Leading => kappa + self.nu1 * self.detuning(),
            ThetaClosure::Anchored { tan_minus, tan_plus } => match self.kappa_roots() {
                Some((km, kp)) if kp > km => tan_minus + (kappa - km) * (tan_plus - tan_minus) / (kp - km),
                _ => 0.5 * (tan_minus + tan_plus),
            },
        }
    }
}

/// `d''` from the directional dispersion of `curve`, remaining inputs from `report`.
pub fn build_reduced(report: &DispersionReport, curve: &DispersionCurve, c: f64) -> Result<ReducedModel> {
    let dd = directional_dispersion(curve, report.params.zeta)?;
    ReducedModel::new(report.c, report.lambda_zz, dd.d2, c, report.c_g, report.kappa_d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerPrediction {
    pub model: ReducedModel,
    pub phi_minus: f64,
    pub phi_plus: f64,
    pub kappa_minus: f64,
    pub kappa_plus: f64,
    /// First index of the sequences; entry `k` belongs to `l = l_start + k`.
    pub l_start: i64,
    pub kappa_seq: Vec<f64>,
    pub theta_seq: Vec<f64>,
    pub classification: Option<CornerKind>,
}

impl CornerPrediction {
    pub fn l_seq(&self) -> usize {
        self.kappa_seq.len() / 2
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.kappa_seq.len() as i64).map(move |k| self.l_start + k)
    }

    /// `theta` at node `l`, extended linearly with the end slopes.
    pub fn theta_at(&self, l: i64) -> f64 {
        let n = self.theta_seq.len() as i64;
        let k = l - self.l_start;
        if k < 0 {
            self.theta_seq[0] + k as f64 * self.start_slope()
        } else if k >= n {
            self.theta_seq[(n - 1) as usize] + (k - n + 1) as f64 * self.end_slope()
        } else {
            self.theta_seq[k as usize]
        }
    }

    /// `theta_{l+1} - theta_l` at the first index.
    pub fn start_slope(&self) -> f64 {
        self.theta_seq[1] - self.theta_seq[0]
    }

    pub fn end_slope(&self) -> f64 {
        let n = self.theta_seq.len();
        self.theta_seq[n - 1] - self.theta_seq[n - 2]
    }

    /// `true` when `kappa` must increase along `l`.
    pub fn increasing(&self) -> bool {
        self.model.f_kappa(0.0) > 0.0
    }
}

/// Polyline `(l, theta_l)` of the predicted interface.
pub fn interface_shape(pred: &CornerPrediction) -> Vec<(i64, f64)> {
    pred.indices().zip(pred.theta_seq.iter().copied()).collect()
}

fn backward_step(model: &ReducedModel, kappa: f64) -> f64 {
    let mut k = kappa;
    for _ in 0..PICARD_STEPS {
        let next = kappa - model.f_kappa(k);
        if (next - k).abs() <= PICARD_TOL * (1.0 + k.abs()) {
            return next;
        }
        k = next;
    }
    k
}

/// Iterates `kappa` from `kappa0` at `l = 0` forwards and backwards over
/// `[-L_seq, L_seq]`, doubling `L_seq` until both ends are within
/// [`END_TOL`] of the fixed points.
pub fn iterate_heteroclinic(model: &ReducedModel, phi: (f64, f64), kappa0: f64, l_seq: usize) -> Result<CornerPrediction> {
    let (km, kp) = model
        .kappa_roots()
        .ok_or_else(|| Error::NoCorner(format!("sign(c - c*) = {} differs from sign(d'') = {}", model.detuning().signum(), model.d_pp.signum())))?;
    let classification = classify_corner(model.c_star, model.kappa_d);
    if kp == km {
        // c = c*: f_kappa vanishes identically.
        let n = l_seq.max(1);
        let slope = model.f_theta(kappa0);
        let kappa_seq = vec![kappa0; 2 * n + 1];
        let theta_seq = (0..=2 * n).map(|k| (k as f64 - n as f64) * slope).collect();
        return Ok(CornerPrediction {
            model: *model,
            phi_minus: phi.0,
            phi_plus: phi.1,
            kappa_minus: km,
            kappa_plus: kp,
            l_start: -(n as i64),
            kappa_seq,
            theta_seq,
            classification,
        });
    }
    if !(kappa0 > km && kappa0 < kp) {
        return Err(Error::Config(format!("kappa0 = {kappa0} must lie strictly between {km} and {kp}")));
    }
    let increasing = model.f_kappa(0.0) > 0.0;
    let (k_back, k_fwd) = if increasing { (km, kp) } else { (kp, km) };
    let mut n = l_seq.max(2);
    loop {
        let mut fwd = Vec::with_capacity(n + 1);
        fwd.push(kappa0);
        for l in 0..n {
            let k = fwd[l] + model.f_kappa(fwd[l]);
            if !(k >= km && k <= kp) {
                return Err(Error::StepSize { lower: km, upper: kp, index: l as i64 + 1 });
            }
            fwd.push(k);
        }
        let mut back = Vec::with_capacity(n);
        let mut k = kappa0;
        for l in 0..n {
            k = backward_step(model, k);
            if !(k >= km && k <= kp) {
                return Err(Error::StepSize { lower: km, upper: kp, index: -(l as i64) - 1 });
            }
            back.push(k);
        }
        let done = (fwd[n] - k_fwd).abs() <= END_TOL && (back[n - 1] - k_back).abs() <= END_TOL;
        if done || n >= MAX_L_SEQ {
            let mut kappa_seq: Vec<f64> = back.into_iter().rev().collect();
            kappa_seq.extend(fwd);
            // theta_0 = 0 at l = 0, index n.
            let mut theta_seq = vec![0.0; kappa_seq.len()];
            for idx in n + 1..kappa_seq.len() {
                theta_seq[idx] = theta_seq[idx - 1] + model.f_theta(kappa_seq[idx - 1]);
            }
            for idx in (0..n).rev() {
                theta_seq[idx] = theta_seq[idx + 1] - model.f_theta(kappa_seq[idx]);
            }
            return Ok(CornerPrediction {
                model: *model,
                phi_minus: phi.0,
                phi_plus: phi.1,
                kappa_minus: km,
                kappa_plus: kp,
                l_start: -(n as i64),
                kappa_seq,
                theta_seq,
                classification,
            });
        }
        n *= 2;
    }
}

/// The full pipeline from a report and an angle sweep around its direction.
pub fn predict_corner(
    report: &DispersionReport,
    curve: &DispersionCurve,
    c: f64,
    anchored: bool,
    l_seq: usize,
) -> Result<CornerPrediction> {
    let dd = directional_dispersion(curve, report.params.zeta)?;
    let (phi_minus, phi_plus) = corner_angles(&dd, c)?;
    let mut model = ReducedModel::new(report.c, report.lambda_zz, dd.d2, c, report.c_g, report.kappa_d)?;
    if anchored {
        model = model.anchored(phi_minus, phi_plus);
    }
    iterate_heteroclinic(&model, (phi_minus, phi_plus), 0.0, l_seq)
}
