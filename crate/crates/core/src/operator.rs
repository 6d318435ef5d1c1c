//! Discrete travelling-wave operator: residual, banded Jacobian and the
//! discretized formal adjoint.
//!
//! Both models share
//! `R_a = gamma Phi_a'' - c Phi_a' + alpha [sum_s Phi_b(. + s) - 4 Phi_a] + g(Phi_a)`
//! with `b = a` (monochromatic, `alpha = 1`, `g = 5/2 g_cub`) or `b = 1 - a`
//! (bichromatic, `g = g_cub`). For the bichromatic model this is
//! `alpha J Delta_{0,zeta} Phi + G(Phi; rho, alpha)` written out.
//!
//! The advection term uses second-order upwind differences in a direction
//! frozen per operator; all other derivatives are central.
//!
//! Jacobian unknowns are interleaved: index `k * d + a` for node `k`,
//! component `a`.

use crate::banded::BandMatrix;
use crate::grid::{diff2_slice, diff2_stencil, upwind_slice, upwind_stencil, Grid, Profile, ShiftStencil};
use crate::model::{Model, WaveParams};

#[derive(Debug, Clone)]
pub struct WaveOperator {
    grid: Grid,
    params: WaveParams,
    stencils: Vec<ShiftStencil>,
    left: Vec<f64>,
    right: Vec<f64>,
    half_band: usize,
    upwind: f64,
}

impl WaveOperator {
    pub fn new(grid: Grid, params: WaveParams, left: Vec<f64>, right: Vec<f64>) -> Self {
        let shifts = params.shifts();
        let stencils = shifts.iter().map(|s| grid.shift_stencil(*s)).collect();
        let max_shift = shifts.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        let d = params.model.components();
        let reach = (max_shift / grid.spacing()).ceil() as usize + 3;
        let upwind = match params.model {
            Model::Monochromatic => -params.rho.signum() * (params.rho != 0.0) as i32 as f64,
            Model::Bichromatic => 0.0,
        };
        Self { grid, params, stencils, left, right, half_band: d * (reach + 1), upwind }
    }

    /// Fixes the upwind direction to the sign of `c` (central for `c = 0`).
    ///
    /// The direction is frozen per operator so the residual stays linear in `c`.
    /// Without a reference speed, monochromatic operators use the sign of `-rho`
    /// and bichromatic ones central differences.
    pub fn with_reference_speed(mut self, c: f64) -> Self {
        self.upwind = if c > 0.0 {
            1.0
        } else if c < 0.0 {
            -1.0
        } else {
            0.0
        };
        self
    }

    pub fn upwind(&self) -> f64 {
        self.upwind
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &WaveParams {
        &self.params
    }

    pub fn components(&self) -> usize {
        self.params.model.components()
    }

    pub fn unknowns(&self) -> usize {
        self.grid.len() * self.components()
    }

    pub fn index(&self, node: usize, comp: usize) -> usize {
        node * self.components() + comp
    }

    /// Residual, component-major like [`Profile`] values.
    pub fn residual(&self, phi: &[f64], c: f64) -> Vec<f64> {
        self.residual_with_limits(phi, c, &self.left, &self.right)
    }

    pub fn residual_with_limits(&self, phi: &[f64], c: f64, left: &[f64], right: &[f64]) -> Vec<f64> {
        let n = self.grid.len();
        let d = self.components();
        let h = self.grid.spacing();
        let alpha = self.params.diffusion();
        let gamma = self.params.gamma;
        let g = self.params.reaction();
        let mut out = vec![0.0; n * d];
        for a in 0..d {
            let b = self.params.model.partner(a);
            let pa = &phi[a * n..(a + 1) * n];
            let pb = &phi[b * n..(b + 1) * n];
            let d1 = upwind_slice(pa, h, self.upwind);
            let d2 = diff2_slice(pa, h);
            let mut lattice = vec![0.0; n];
            for st in &self.stencils {
                for (acc, v) in lattice.iter_mut().zip(st.apply(pb, left[b], right[b])) {
                    *acc += v;
                }
            }
            let r = &mut out[a * n..(a + 1) * n];
            for k in 0..n {
                r[k] = gamma * d2[k] - c * d1[k] + alpha * (lattice[k] - 4.0 * pa[k]) + g.value(pa[k]);
            }
        }
        out
    }

    /// Jacobian of the residual with respect to the interleaved node values.
    pub fn jacobian(&self, phi: &[f64], c: f64) -> BandMatrix {
        self.linearization(phi, c, 1.0)
    }

    /// Direct discretization of the formal adjoint
    /// `gamma q'' + c q' + alpha [sum_s q_b(. - s) - 4 q_a] + g'(Phi_a) q_a`.
    ///
    /// The shift set is symmetric, so only the sign of the advection flips.
    pub fn adjoint_discretization(&self, phi: &[f64], c: f64) -> BandMatrix {
        self.linearization(phi, c, -1.0)
    }

    fn linearization(&self, phi: &[f64], c: f64, advection_sign: f64) -> BandMatrix {
        let n = self.grid.len();
        let d = self.components();
        let h = self.grid.spacing();
        let alpha = self.params.diffusion();
        let gamma = self.params.gamma;
        let g = self.params.reaction();
        let direction = advection_sign * self.upwind;
        let mut m = BandMatrix::zeros(n * d, self.half_band, self.half_band);
        for a in 0..d {
            let b = self.params.model.partner(a);
            for k in 0..n {
                let row = self.index(k, a);
                for (j, w) in diff2_stencil(k, n, h) {
                    if w != 0.0 {
                        m.add(row, self.index(j, a), gamma * w);
                    }
                }
                for (j, w) in upwind_stencil(k, n, h, direction) {
                    if w != 0.0 {
                        m.add(row, self.index(j, a), -advection_sign * c * w);
                    }
                }
                for st in &self.stencils {
                    st.for_each_weight(k, |j, w| m.add(row, self.index(j, b), alpha * w));
                }
                m.add(row, row, -4.0 * alpha + g.d1(phi[a * n + k]));
            }
        }
        m
    }

    /// Derivative of the residual with respect to `c`: minus the upwinded `Phi'`.
    pub fn speed_derivative(&self, phi: &[f64]) -> Vec<f64> {
        let n = self.grid.len();
        let h = self.grid.spacing();
        let mut out = Vec::with_capacity(phi.len());
        for a in 0..self.components() {
            out.extend(upwind_slice(&phi[a * n..(a + 1) * n], h, self.upwind).into_iter().map(|v| -v));
        }
        out
    }

    /// Applies the linearization to a component-major perturbation (zero limits).
    pub fn apply_linearization(&self, jac: &BandMatrix, p: &[f64]) -> Vec<f64> {
        from_interleaved(&jac.mul_vec(&to_interleaved(p, self.components())), self.components())
    }

    pub fn model(&self) -> Model {
        self.params.model
    }

    pub fn limits(&self) -> (&[f64], &[f64]) {
        (&self.left, &self.right)
    }

    pub fn profile(&self, values: Vec<f64>) -> Profile {
        Profile::new(self.grid, self.components(), values, self.left.clone(), self.right.clone())
            .expect("operator profile shape")
    }
}

pub fn to_interleaved(v: &[f64], d: usize) -> Vec<f64> {
    if d == 1 {
        return v.to_vec();
    }
    let n = v.len() / d;
    let mut out = vec![0.0; v.len()];
    for a in 0..d {
        for k in 0..n {
            out[k * d + a] = v[a * n + k];
        }
    }
    out
}

pub fn from_interleaved(v: &[f64], d: usize) -> Vec<f64> {
    if d == 1 {
        return v.to_vec();
    }
    let n = v.len() / d;
    let mut out = vec![0.0; v.len()];
    for a in 0..d {
        for k in 0..n {
            out[a * n + k] = v[k * d + a];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(grid: Grid, d: usize) -> Vec<f64> {
        let mut v = Vec::new();
        for a in 0..d {
            v.extend(grid.nodes().map(|x| (x * (0.8 + 0.3 * a as f64)).tanh()));
        }
        v
    }

    #[test]
    fn equilibria_have_zero_residual() {
        let grid = Grid::new(10.0, 0.1).unwrap();
        for rho in [0.0, 0.4, 0.9] {
            let params = WaveParams::monochromatic(rho, 0.3);
            for u in [1.0, -1.0, rho] {
                let op = WaveOperator::new(grid, params, vec![u], vec![u]);
                let r = op.residual(&vec![u; grid.len()], 0.7);
                assert!(r.iter().all(|v| v.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let grid = Grid::new(6.0, 0.1).unwrap();
        for params in [WaveParams::monochromatic(0.4, 0.5), WaveParams::bichromatic(0.2, 0.07, 0.9)] {
            let d = params.model.components();
            let op = WaveOperator::new(grid, params, vec![-1.0; d], vec![1.0; d]);
            let phi = ramp(grid, d);
            let c = -0.3;
            let jac = op.jacobian(&phi, c);
            let n = phi.len();
            let eps = 1e-6;
            for col in [0, 7, n / 2, n - 1] {
                let mut plus = phi.clone();
                let mut minus = phi.clone();
                plus[col] += eps;
                minus[col] -= eps;
                let rp = op.residual(&plus, c);
                let rm = op.residual(&minus, c);
                let (node, comp) = (col % grid.len(), col / grid.len());
                let jcol = op.index(node, comp);
                for row in 0..n {
                    let fd = (rp[row] - rm[row]) / (2.0 * eps);
                    let (rn, rc) = (row % grid.len(), row / grid.len());
                    let an = jac.get(op.index(rn, rc), jcol);
                    assert!((fd - an).abs() < 1e-5 * (1.0 + an.abs()), "row {row} col {col}: {fd} vs {an}");
                }
            }
        }
    }

    #[test]
    fn interleaving_round_trip() {
        let v: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert_eq!(from_interleaved(&to_interleaved(&v, 2), 2), v);
        assert_eq!(to_interleaved(&v, 2)[1], 5.0);
    }
}
