//! Parameters and nonlinearities of the monochromatic and bichromatic
//! Nagumo lattice equations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default artificial viscosity added to every travelling-wave equation.
pub const DEFAULT_GAMMA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// `u' = Delta^+ u + (5/2) g_cub(u; rho)` on the square lattice.
    Monochromatic,
    /// Doubled system with sublattice coupling and diffusion `alpha`.
    Bichromatic,
}

impl Model {
    pub fn components(self) -> usize {
        match self {
            Model::Monochromatic => 1,
            Model::Bichromatic => 2,
        }
    }

    /// Factor in front of `g_cub`.
    pub fn reaction_scale(self) -> f64 {
        match self {
            Model::Monochromatic => 2.5,
            Model::Bichromatic => 1.0,
        }
    }

    /// Component whose neighbours feed the lattice coupling of component `c`.
    pub fn partner(self, c: usize) -> usize {
        match self {
            Model::Monochromatic => c,
            Model::Bichromatic => 1 - c,
        }
    }
}

/// Parameters of one travelling-wave problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub rho: f64,
    pub zeta: f64,
    /// Diffusion coefficient; ignored (fixed at 1) for the monochromatic model.
    pub alpha: f64,
    pub gamma: f64,
    pub model: Model,
}

impl WaveParams {
    pub fn monochromatic(rho: f64, zeta: f64) -> Self {
        Self { rho, zeta, alpha: 1.0, gamma: DEFAULT_GAMMA, model: Model::Monochromatic }
    }

    pub fn bichromatic(rho: f64, alpha: f64, zeta: f64) -> Self {
        Self { rho, zeta, alpha, gamma: DEFAULT_GAMMA, model: Model::Bichromatic }
    }

    pub fn with_rho(self, rho: f64) -> Self {
        Self { rho, ..self }
    }

    pub fn with_zeta(self, zeta: f64) -> Self {
        Self { zeta, ..self }
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        Self { gamma, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho.abs() < 1.0) {
            return Err(Error::Domain(format!("|rho| must be < 1, got rho = {}", self.rho)));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::Domain(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::Domain(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !self.zeta.is_finite() {
            return Err(Error::Domain("zeta must be finite".into()));
        }
        Ok(())
    }

    /// Effective lattice diffusion.
    pub fn diffusion(&self) -> f64 {
        match self.model {
            Model::Monochromatic => 1.0,
            Model::Bichromatic => self.alpha,
        }
    }

    pub fn reaction(&self) -> Reaction {
        Reaction { rho: self.rho, scale: self.model.reaction_scale() }
    }

    /// Shifts `(+cos, -cos, +sin, -sin)` of the five-point stencil.
    pub fn shifts(&self) -> [f64; 4] {
        let (s, c) = self.zeta.sin_cos();
        [c, -c, s, -s]
    }
}

/// `scale * (u^2 - 1)(rho - u)` and its derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reaction {
    pub rho: f64,
    pub scale: f64,
}

impl Reaction {
    pub fn value(&self, u: f64) -> f64 {
        self.scale * (u * u - 1.0) * (self.rho - u)
    }

    pub fn d1(&self, u: f64) -> f64 {
        self.scale * (2.0 * self.rho * u - 3.0 * u * u + 1.0)
    }

    pub fn d2(&self, u: f64) -> f64 {
        self.scale * (2.0 * self.rho - 6.0 * u)
    }

    /// Largest `|g'(u)|` for `u` in `[-1, 1]`.
    pub fn max_slope_on_unit_interval(&self) -> f64 {
        let mut best = self.d1(-1.0).abs().max(self.d1(1.0).abs());
        // g' is a downward parabola with vertex at u = rho / 3.
        let vertex = self.rho / 3.0;
        if vertex.abs() <= 1.0 {
            best = best.max(self.d1(vertex).abs());
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_roots_and_slopes() {
        for rho in [-0.5, 0.0, 0.3, 0.9] {
            let g = WaveParams::monochromatic(rho, 0.0).reaction();
            for u in [-1.0, rho, 1.0] {
                assert!(g.value(u).abs() < 1e-15);
            }
            assert!((g.d1(1.0) - 5.0 * (rho - 1.0)).abs() < 1e-14);
            assert!((g.d1(-1.0) + 5.0 * (rho + 1.0)).abs() < 1e-14);
            let h = 1e-6;
            let u = 0.37;
            assert!(((g.value(u + h) - g.value(u - h)) / (2.0 * h) - g.d1(u)).abs() < 1e-8);
            assert!(((g.d1(u + h) - g.d1(u - h)) / (2.0 * h) - g.d2(u)).abs() < 1e-8);
        }
    }

    #[test]
    fn validation() {
        assert!(WaveParams::monochromatic(1.5, 0.0).validate().is_err());
        assert!(WaveParams::monochromatic(0.9, 0.0).with_gamma(0.0).validate().is_err());
        assert!(WaveParams::bichromatic(0.0, -1.0, 0.0).validate().is_err());
        assert!(WaveParams::bichromatic(0.0, 0.05, 0.0).validate().is_ok());
    }
}
