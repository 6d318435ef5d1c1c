//! Experiment configuration: JSON files plus command-line overrides,
//! validated per command before any computation starts.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use nagumo_core::bichromatic::Connection;
use nagumo_core::lattice::{MIN_WINDOW, DEFAULT_CADENCE, DEFAULT_T};
use nagumo_core::{Grid, Model, SolverOptions, WaveParams};

pub const DEFAULT_GAMMA: f64 = nagumo_core::model::DEFAULT_GAMMA;
pub const DEFAULT_L: f64 = 20.0;
pub const DEFAULT_H: f64 = 0.05;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 50;
pub const DEFAULT_SWEEP_STEP: f64 = PI / 360.0;
pub const DEFAULT_CORNER_STEP: f64 = PI / 720.0;
pub const DEFAULT_HALF_WIDTH: f64 = 0.2;
pub const DEFAULT_DETUNING: f64 = 1e-2;
pub const DEFAULT_L_SEQ: usize = 2000;
pub const DEFAULT_CORNER_WINDOW: [usize; 2] = [400, 400];
pub const DEFAULT_PLANAR_WINDOW: [usize; 2] = [300, 64];

/// Invalid or inconsistent configuration; maps to exit code 2.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Wave,
    Adjoint,
    Dispersion,
    Sweep,
    Corner,
    Simulate,
    Hs1,
    Bichromatic,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Wave => "wave",
            Command::Adjoint => "adjoint",
            Command::Dispersion => "dispersion",
            Command::Sweep => "sweep",
            Command::Corner => "corner",
            Command::Simulate => "simulate",
            Command::Hs1 => "hs1",
            Command::Bichromatic => "bichromatic",
        }
    }

    /// Keys accepted in addition to the common ones.
    fn keys(self) -> &'static [&'static str] {
        const CORNER: &[&str] = &["zeta", "detuning", "c_target", "anchored", "l_seq", "half_width", "step"];
        match self {
            Command::Wave | Command::Adjoint | Command::Dispersion => &["zeta"],
            Command::Sweep => &["zeta", "zeta_range", "rho_range", "step"],
            Command::Corner => CORNER,
            Command::Simulate => &[
                "zeta", "detuning", "c_target", "anchored", "l_seq", "half_width", "step", "initial", "window", "t_end", "dt",
                "cadence",
            ],
            Command::Hs1 => &["zeta", "omega_points", "nu_points", "nu_max"],
            Command::Bichromatic => &["zeta", "alpha", "connection", "alpha_range", "step", "c_guess"],
        }
    }
}

const COMMON_KEYS: &[&str] = &["command", "rho", "gamma", "L", "h", "tol", "max_iters", "out", "jobs"];

/// Every key any command understands; unknown keys are rejected while parsing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub command: Option<Command>,
    pub rho: Option<f64>,
    pub zeta: Option<f64>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub h: Option<f64>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub zeta_range: Option<[f64; 2]>,
    pub rho_range: Option<[f64; 2]>,
    pub step: Option<f64>,
    pub detuning: Option<f64>,
    pub c_target: Option<f64>,
    pub anchored: Option<bool>,
    pub l_seq: Option<usize>,
    pub half_width: Option<f64>,
    pub initial: Option<Initial>,
    pub window: Option<[usize; 2]>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub cadence: Option<f64>,
    pub omega_points: Option<usize>,
    pub nu_points: Option<usize>,
    pub nu_max: Option<f64>,
    pub connection: Option<Connection>,
    pub alpha_range: Option<[f64; 2]>,
    pub c_guess: Option<f64>,
}

impl RawConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError(format!("invalid configuration: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Names of the keys that are set.
    fn present(&self) -> Vec<&'static str> {
        let v = serde_json::to_value(self).expect("config serializes");
        let map = v.as_object().expect("config is an object");
        COMMON_KEYS
            .iter()
            .chain(ALL_COMMAND_KEYS)
            .copied()
            .filter(|k| map.get(*k).is_some_and(|x| !x.is_null()))
            .collect()
    }
}

const ALL_COMMAND_KEYS: &[&str] = &[
    "zeta", "alpha", "zeta_range", "rho_range", "step", "detuning", "c_target", "anchored", "l_seq", "half_width", "initial",
    "window", "t_end", "dt", "cadence", "omega_points", "nu_points", "nu_max", "connection", "alpha_range", "c_guess",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Initial {
    Planar,
    Corner,
}

/// Parameter swept by the `sweep` command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Zeta,
    Rho,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub range: [f64; 2],
    pub step: f64,
}

impl SweepConfig {
    pub fn planned_solves(&self) -> usize {
        ((self.range[1] - self.range[0]).abs() / self.step + 1e-9).floor() as usize + 1
    }

    pub fn values(&self) -> Vec<f64> {
        let dir = (self.range[1] - self.range[0]).signum();
        (0..self.planned_solves()).map(|k| self.range[0] + dir * k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CornerConfig {
    /// `c - c* = detuning * d''` unless `c_target` is given.
    pub detuning: f64,
    pub c_target: Option<f64>,
    pub anchored: bool,
    pub l_seq: usize,
    pub half_width: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub initial: Initial,
    pub window: [usize; 2],
    pub t_end: f64,
    pub dt: Option<f64>,
    pub cadence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hs1Config {
    pub omega_points: usize,
    pub nu_points: usize,
    pub nu_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BichromaticConfig {
    pub connection: Connection,
    pub alpha_range: Option<[f64; 2]>,
    pub step: f64,
    pub c_guess: Option<f64>,
}

/// Validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub params: WaveParams,
    #[serde(rename = "L")]
    pub l: f64,
    pub h: f64,
    pub solver: SolverOptions,
    pub out: PathBuf,
    pub jobs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corner: Option<CornerConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hs1: Option<Hs1Config>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bichromatic: Option<BichromaticConfig>,
}

fn positive(name: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        err(format!("field `{name}` must be a positive number, got {v}"))
    }
}

fn finite(name: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        err(format!("field `{name}` must be finite"))
    }
}

fn rho_in_domain(name: &str, rho: f64) -> Result<f64, ConfigError> {
    if rho.is_finite() && rho.abs() < 1.0 {
        Ok(rho)
    } else {
        err(format!("domain error: field `{name}` must satisfy |rho| < 1, got {rho}"))
    }
}

impl ExperimentConfig {
    pub fn grid(&self) -> Grid {
        Grid::new(self.l, self.h).expect("grid validated")
    }

    pub fn is_bichromatic(&self) -> bool {
        self.params.model == Model::Bichromatic
    }
}

/// Validates `raw` against the schema of its command and fills defaults.
pub fn parse_config(raw: &RawConfig) -> Result<ExperimentConfig, ConfigError> {
    let command = match raw.command {
        Some(c) => c,
        None => return err("missing field `command`"),
    };
    for key in raw.present() {
        if !COMMON_KEYS.contains(&key) && !command.keys().contains(&key) {
            return err(format!("field `{key}` is not valid for command `{}`", command.name()));
        }
    }

    let rho = match raw.rho {
        Some(r) => rho_in_domain("rho", r)?,
        None if raw.rho_range.is_some() => 0.0,
        None => return err("missing field `rho`"),
    };
    let zeta = finite("zeta", raw.zeta.unwrap_or(0.0))?;
    let gamma = positive("gamma", raw.gamma.unwrap_or(DEFAULT_GAMMA))?;
    let l = positive("L", raw.l.unwrap_or(DEFAULT_L))?;
    let h = positive("h", raw.h.unwrap_or(DEFAULT_H))?;
    Grid::new(l, h).map_err(|e| ConfigError(format!("fields `L`, `h`: {e}")))?;
    let tol = positive("tol", raw.tol.unwrap_or(DEFAULT_TOL))?;
    let max_iters = raw.max_iters.unwrap_or(DEFAULT_MAX_ITERS);
    if max_iters == 0 {
        return err("field `max_iters` must be at least 1");
    }
    if raw.jobs == Some(0) {
        return err("field `jobs` must be at least 1");
    }

    let params = if command == Command::Bichromatic {
        let alpha = match (raw.alpha, raw.alpha_range) {
            (Some(a), _) => a,
            (None, Some(r)) => r[0],
            (None, None) => return err("missing field `alpha` for command `bichromatic`"),
        };
        WaveParams::bichromatic(rho, positive("alpha", alpha)?, zeta).with_gamma(gamma)
    } else {
        WaveParams::monochromatic(rho, zeta).with_gamma(gamma)
    };

    let mut cfg = ExperimentConfig {
        command,
        params,
        l,
        h,
        solver: SolverOptions { tol, max_iters },
        out: raw.out.clone().unwrap_or_else(|| PathBuf::from(".")),
        jobs: raw.jobs,
        sweep: None,
        corner: None,
        simulation: None,
        hs1: None,
        bichromatic: None,
    };

    match command {
        Command::Sweep => {
            let step = positive("step", raw.step.unwrap_or(DEFAULT_SWEEP_STEP))?;
            let (axis, range) = match (raw.zeta_range, raw.rho_range) {
                (Some(_), Some(_)) => return err("fields `zeta_range` and `rho_range` are mutually exclusive"),
                (None, Some(r)) => {
                    rho_in_domain("rho_range", r[0])?;
                    rho_in_domain("rho_range", r[1])?;
                    (SweepAxis::Rho, r)
                }
                (Some(r), None) => (SweepAxis::Zeta, [finite("zeta_range", r[0])?, finite("zeta_range", r[1])?]),
                (None, None) => (SweepAxis::Zeta, [0.0, FRAC_PI_2]),
            };
            if raw.rho.is_some() && axis == SweepAxis::Rho {
                return err("field `rho` conflicts with `rho_range`");
            }
            if axis == SweepAxis::Rho {
                cfg.params = cfg.params.with_rho(range[0]);
            }
            cfg.sweep = Some(SweepConfig { axis, range, step });
        }
        Command::Corner | Command::Simulate => {
            let corner = CornerConfig {
                detuning: finite("detuning", raw.detuning.unwrap_or(DEFAULT_DETUNING))?,
                c_target: raw.c_target.map(|c| finite("c_target", c)).transpose()?,
                anchored: raw.anchored.unwrap_or(true),
                l_seq: raw.l_seq.unwrap_or(DEFAULT_L_SEQ).max(1),
                half_width: positive("half_width", raw.half_width.unwrap_or(DEFAULT_HALF_WIDTH))?,
                step: positive("step", raw.step.unwrap_or(DEFAULT_CORNER_STEP))?,
            };
            if command == Command::Simulate {
                let initial = raw.initial.unwrap_or(Initial::Planar);
                let default_window = if initial == Initial::Corner { DEFAULT_CORNER_WINDOW } else { DEFAULT_PLANAR_WINDOW };
                let window = raw.window.unwrap_or(default_window);
                if window.iter().any(|n| *n < MIN_WINDOW) {
                    return err(format!("field `window` must be at least {MIN_WINDOW}x{MIN_WINDOW}, got {}x{}", window[0], window[1]));
                }
                cfg.simulation = Some(SimulationConfig {
                    initial,
                    window,
                    t_end: positive("t_end", raw.t_end.unwrap_or(DEFAULT_T))?,
                    dt: raw.dt.map(|d| positive("dt", d)).transpose()?,
                    cadence: positive("cadence", raw.cadence.unwrap_or(DEFAULT_CADENCE))?,
                });
                if initial == Initial::Planar {
                    let corner_only = ["detuning", "c_target", "anchored", "l_seq", "half_width", "step"];
                    if let Some(k) = raw.present().into_iter().find(|k| corner_only.contains(k)) {
                        return err(format!("field `{k}` needs `initial` = \"corner\""));
                    }
                } else {
                    cfg.corner = Some(corner);
                }
            } else {
                cfg.corner = Some(corner);
            }
        }
        Command::Hs1 => {
            cfg.hs1 = Some(Hs1Config {
                omega_points: raw.omega_points.unwrap_or(401).max(1),
                nu_points: raw.nu_points.unwrap_or(401).max(1),
                nu_max: positive("nu_max", raw.nu_max.unwrap_or(20.0))?,
            });
        }
        Command::Bichromatic => {
            let connection = raw.connection.unwrap_or(Connection::Lower);
            if connection == Connection::Monochromatic {
                return err("field `connection` must be \"lower\" or \"upper\" for command `bichromatic`");
            }
            if raw.alpha.is_some() && raw.alpha_range.is_some() {
                return err("fields `alpha` and `alpha_range` are mutually exclusive");
            }
            if let Some(r) = raw.alpha_range {
                positive("alpha_range", r[0])?;
                positive("alpha_range", r[1])?;
            }
            cfg.bichromatic = Some(BichromaticConfig {
                connection,
                alpha_range: raw.alpha_range,
                step: positive("step", raw.step.unwrap_or(1e-3))?,
                c_guess: raw.c_guess.map(|c| finite("c_guess", c)).transpose()?,
            });
        }
        Command::Wave | Command::Adjoint | Command::Dispersion => {}
    }
    Ok(cfg)
}
