//! Experiment orchestration for each command.

use std::path::PathBuf;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde_json::{json, Value};

use nagumo_core::corner::CornerPrediction;
use nagumo_core::dispersion::{CornerKind, DispersionReport};
use nagumo_core::lattice::{run as integrate, track_rows, History, RunOptions};
use nagumo_core::wave::continuation_step;
use nagumo_core::*;

use crate::config::{Command, ExperimentConfig, Initial, SweepAxis};
use crate::output::{metadata, num, opt, write_json, Table};

/// Flank rows used for slope and speed measurement in corner runs.
const FLANK_ROWS: (i64, i64) = (50, 150);

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("cannot create {}", cfg.out.display()))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.jobs {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("cannot start worker pool")?;
    pool.install(|| match cfg.command {
        Command::Wave => wave(cfg, false),
        Command::Adjoint => wave(cfg, true),
        Command::Dispersion => dispersion(cfg),
        Command::Sweep => sweep(cfg),
        Command::Corner => corner(cfg),
        Command::Simulate => simulate(cfg),
        Command::Hs1 => hs1(cfg),
        Command::Bichromatic => bichromatic(cfg),
    })
}

fn config_value(cfg: &ExperimentConfig) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

fn solve_at(cfg: &ExperimentConfig, params: &WaveParams) -> nagumo_core::Result<WaveSolution> {
    let grid = cfg.grid();
    match params.model {
        Model::Monochromatic => solve_wave(params, &InitialGuess::monochromatic(grid), &cfg.solver),
        Model::Bichromatic => {
            let b = cfg.bichromatic.as_ref().expect("bichromatic section");
            let guess = match b.c_guess {
                Some(c) => {
                    let (l, r) = bichromatic::limits_for(params, b.connection, &[0.0, 0.0], &[0.0, 0.0])?;
                    let mut g = InitialGuess::tanh(grid, &l, &r);
                    g.c = c;
                    Some(g)
                }
                None => None,
            };
            solve_bichromatic_wave(params, b.connection, guess.as_ref(), grid, &cfg.solver)
        }
    }
}

/// Independent solves in parallel; failures are retried by continuation from
/// a converged neighbour, first left to right, then right to left.
fn solve_many(cfg: &ExperimentConfig, params: &[WaveParams]) -> Vec<nagumo_core::Result<WaveSolution>> {
    let mut out: Vec<nagumo_core::Result<WaveSolution>> = params.par_iter().map(|p| solve_at(cfg, p)).collect();
    for k in 1..out.len() {
        if out[k].is_err() {
            if let Ok(prev) = &out[k - 1] {
                if let Ok(sol) = continuation_step(prev, &params[k], &cfg.solver) {
                    out[k] = Ok(sol);
                }
            }
        }
    }
    for k in (0..out.len().saturating_sub(1)).rev() {
        if out[k].is_err() {
            if let Ok(next) = &out[k + 1] {
                if let Ok(sol) = continuation_step(next, &params[k], &cfg.solver) {
                    out[k] = Ok(sol);
                }
            }
        }
    }
    out
}

fn component_names(base: &str, d: usize) -> Vec<String> {
    if d == 1 {
        vec![base.to_string()]
    } else {
        vec![format!("{base}_u"), format!("{base}_v")]
    }
}

fn write_wave(cfg: &ExperimentConfig, sol: &WaveSolution, extra: Value) -> Result<PathBuf> {
    let d = sol.phi().components();
    let mut columns = vec!["xi".to_string()];
    for base in ["phi", "psi", "corrector"] {
        columns.extend(component_names(base, d));
    }
    let meta = metadata(
        &config_value(cfg),
        json!({
            "c": sol.c(),
            "residual": sol.residual_norm(),
            "iterations": sol.iterations(),
            "connection": sol.connection(),
            "left_limit": sol.phi().left_limit(),
            "right_limit": sol.phi().right_limit(),
            "psi_normalization": "<psi, phi'> = 1",
            "extra": extra,
        }),
    );
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::create(&cfg.out, "wave.csv", &meta, &cols)?;
    let grid = sol.grid();
    for k in 0..grid.len() {
        let mut cells = vec![num(grid.node(k))];
        for p in [Some(sol.phi()), Some(sol.psi()), sol.corrector()] {
            for a in 0..d {
                cells.push(p.map_or(String::new(), |p| num(p.component(a)[k])));
            }
        }
        table.row(&cells)?;
    }
    Ok(table.finish()?)
}

const DISPERSION_COLUMNS: [&str; 15] = [
    "rho",
    "zeta",
    "alpha",
    "c",
    "c_g",
    "lambda_zz",
    "c_zetazeta",
    "kappa_d",
    "c_zeta_fd",
    "c_zetazeta_fd",
    "corner",
    "c_g_method",
    "lambda_zz_method",
    "c_zetazeta_method",
    "fd_method",
];

fn corner_tag(kind: Option<CornerKind>) -> String {
    match kind {
        Some(CornerKind::Interior) => "interior".into(),
        Some(CornerKind::Exterior) => "exterior".into(),
        None => String::new(),
    }
}

fn dispersion_row(r: &DispersionReport, fd: Option<(f64, f64)>, fd_method: &str) -> Vec<String> {
    vec![
        num(r.params.rho),
        num(r.params.zeta),
        num(r.params.alpha),
        num(r.c),
        num(r.c_g),
        num(r.lambda_zz),
        num(r.c_zetazeta),
        num(r.kappa_d),
        opt(fd.map(|f| f.0)),
        opt(fd.map(|f| f.1)),
        corner_tag(r.corner),
        r.methods.c_g.tag().into(),
        r.methods.lambda_zz.tag().into(),
        r.methods.c_zetazeta.tag().into(),
        if fd.is_some() { fd_method.into() } else { String::new() },
    ]
}

fn write_dispersion(cfg: &ExperimentConfig, rows: &[(DispersionReport, Option<(f64, f64)>)], extra: Value) -> Result<PathBuf> {
    let meta = metadata(&config_value(cfg), extra);
    let mut table = Table::create(&cfg.out, "dispersion.csv", &meta, &DISPERSION_COLUMNS)?;
    for (r, fd) in rows {
        table.row(&dispersion_row(r, *fd, Method::FiniteDifference.tag()))?;
    }
    Ok(table.finish()?)
}

fn wave(cfg: &ExperimentConfig, adjoint_only: bool) -> Result<Vec<PathBuf>> {
    let sol = solve_at(cfg, &cfg.params)?;
    if adjoint_only {
        let diag = *sol.adjoint_diagnostics();
        let path = write_wave(cfg, &sol, json!({ "adjoint": diag }))?;
        return Ok(vec![path]);
    }
    let sol = sol.with_corrector()?;
    let report = dispersion_report(&sol, false, &cfg.solver)?;
    Ok(vec![write_wave(cfg, &sol, Value::Null)?, write_dispersion(cfg, &[(report, None)], Value::Null)?])
}

fn dispersion(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let sol = solve_at(cfg, &cfg.params)?;
    let report = dispersion_report(&sol, true, &cfg.solver)?;
    let fd = report.c_zeta_fd.zip(report.c_zetazeta_fd);
    let extra = json!({ "fd_step": nagumo_core::dispersion::FD_STEP, "fd_scheme": "five-point stencil in zeta by continuation" });
    Ok(vec![write_dispersion(cfg, &[(report, fd)], extra)?])
}

/// Five-point first and second derivatives at interior samples of a uniform sweep.
fn sweep_differences(values: &[Option<f64>], step: f64) -> Vec<Option<(f64, f64)>> {
    let n = values.len();
    (0..n)
        .map(|k| {
            if k < 2 || k + 2 >= n {
                return None;
            }
            let [m2, m1, c0, p1, p2] = [values[k - 2]?, values[k - 1]?, values[k]?, values[k + 1]?, values[k + 2]?];
            let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * step);
            let d2 = (-m2 + 16.0 * m1 - 30.0 * c0 + 16.0 * p1 - p2) / (12.0 * step * step);
            Some((d1, d2))
        })
        .collect()
}

fn failures_json(values: &[f64], errors: &[(usize, String)]) -> Value {
    Value::Array(errors.iter().map(|(k, e)| json!({ "value": values[*k], "error": e })).collect())
}

fn sweep(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let sweep = cfg.sweep.as_ref().expect("sweep section");
    let values = sweep.values();
    let params: Vec<WaveParams> = values
        .iter()
        .map(|v| match sweep.axis {
            SweepAxis::Zeta => cfg.params.with_zeta(*v),
            SweepAxis::Rho => cfg.params.with_rho(*v),
        })
        .collect();
    let sols = solve_many(cfg, &params);
    let reports: Vec<nagumo_core::Result<DispersionReport>> = sols
        .par_iter()
        .map(|s| s.as_ref().map_err(Clone::clone).and_then(|s| dispersion_report(s, false, &cfg.solver)))
        .collect();
    let mut first_error = None;
    let mut errors = Vec::new();
    for (k, r) in reports.iter().enumerate() {
        if let Err(e) = r {
            errors.push((k, e.to_string()));
            first_error.get_or_insert_with(|| e.clone());
        }
    }
    let fd = match sweep.axis {
        SweepAxis::Zeta => sweep_differences(&reports.iter().map(|r| r.as_ref().ok().map(|r| r.c)).collect::<Vec<_>>(), sweep.step),
        SweepAxis::Rho => vec![None; values.len()],
    };
    let rows: Vec<(DispersionReport, Option<(f64, f64)>)> =
        reports.iter().zip(fd).filter_map(|(r, f)| r.as_ref().ok().map(|r| (r.clone(), f))).collect();
    let extra = json!({
        "axis": sweep.axis,
        "planned_solves": values.len(),
        "converged": rows.len(),
        "failures": failures_json(&values, &errors),
        "fd_scheme": "five-point stencil over neighbouring sweep samples",
    });
    let mut paths = vec![write_dispersion(cfg, &rows, extra.clone())?];
    if sweep.axis == SweepAxis::Zeta {
        let meta = metadata(&config_value(cfg), json!({ "convention": "points (-c cos zeta, -c sin zeta)", "sweep": extra }));
        let mut table = Table::create(&cfg.out, "polar.csv", &meta, &["zeta", "x", "y"])?;
        for (r, _) in &rows {
            let (s, c) = r.params.zeta.sin_cos();
            table.row(&[num(r.params.zeta), num(-r.c * c), num(-r.c * s)])?;
        }
        paths.push(table.finish()?);
    }
    match first_error {
        Some(e) => Err(anyhow::Error::new(e).context(format!("{} of {} sweep points failed", errors.len(), values.len()))),
        None => Ok(paths),
    }
}

struct CornerSetup {
    sol: WaveSolution,
    report: DispersionReport,
    d_pp: f64,
    c_target: f64,
    pred: CornerPrediction,
}

fn corner_setup(cfg: &ExperimentConfig) -> Result<CornerSetup> {
    let cc = cfg.corner.as_ref().expect("corner section");
    let sol = solve_at(cfg, &cfg.params)?;
    let report = dispersion_report(&sol, false, &cfg.solver)?;
    let z = cfg.params.zeta;
    let curve = angle_sweep(&sol, (z - cc.half_width, z + cc.half_width), cc.step, &cfg.solver)?;
    let dd = directional_dispersion(&curve, z)?;
    let c_target = cc.c_target.unwrap_or(sol.c() + cc.detuning * dd.d2);
    let pred = predict_corner(&report, &curve, c_target, cc.anchored, cc.l_seq)?;
    Ok(CornerSetup { sol, report, d_pp: dd.d2, c_target, pred })
}

fn corner_meta(setup: &CornerSetup) -> Value {
    let p = &setup.pred;
    json!({
        "c_star": setup.sol.c(),
        "c_target": setup.c_target,
        "d_pp": setup.d_pp,
        "lambda_zz": setup.report.lambda_zz,
        "kappa_d": setup.report.kappa_d,
        "nu1": p.model.nu1,
        "nu2": p.model.nu2,
        "phi_minus": p.phi_minus,
        "phi_plus": p.phi_plus,
        "kappa_minus": p.kappa_minus,
        "kappa_plus": p.kappa_plus,
        "classification": corner_tag(p.classification),
        "theta_closure": p.model.closure.tag(),
        "theta_closure_note": "the O(kappa^2) coefficient of f_theta is not known; leading-order uses f_theta = kappa + nu1 (c - c*)",
        "l_start": p.l_start,
    })
}

fn write_corner(cfg: &ExperimentConfig, setup: &CornerSetup) -> Result<PathBuf> {
    let meta = metadata(&config_value(cfg), corner_meta(setup));
    let mut table = Table::create(&cfg.out, "corner.csv", &meta, &["l", "kappa", "theta", "slope"])?;
    let p = &setup.pred;
    let n = p.theta_seq.len();
    for (k, l) in p.indices().enumerate() {
        let slope = if k + 1 < n { num(p.theta_seq[k + 1] - p.theta_seq[k]) } else { String::new() };
        table.row(&[l.to_string(), num(p.kappa_seq[k]), num(p.theta_seq[k]), slope])?;
    }
    Ok(table.finish()?)
}

fn corner(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let setup = corner_setup(cfg)?;
    Ok(vec![write_corner(cfg, &setup)?])
}

fn write_snapshot(cfg: &ExperimentConfig, state: &LatticeState, name: &str) -> Result<PathBuf> {
    let path = cfg.out.join(name);
    let file = std::io::BufWriter::new(std::fs::File::create(&path)?);
    let extra = json!({ "tool": crate::output::TOOL, "version": crate::output::VERSION, "config": config_value(cfg) });
    state.write_csv(file, &extra)?;
    Ok(path)
}

fn write_track(cfg: &ExperimentConfig, history: &History, meta: Value) -> Result<PathBuf> {
    let meta = metadata(&config_value(cfg), meta);
    let mut table = Table::create(&cfg.out, "track.csv", &meta, &["t", "mean_crossing", "rows"])?;
    for (t, xs) in history.times.iter().zip(&history.crossings) {
        let found: Vec<f64> = xs.iter().flatten().copied().collect();
        let mean = if found.is_empty() { f64::NAN } else { found.iter().sum::<f64>() / found.len() as f64 };
        table.row(&[num(*t), num(mean), found.len().to_string()])?;
    }
    Ok(table.finish()?)
}

fn simulate(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let sim = cfg.simulation.as_ref().expect("simulation section");
    let window = Window::centered(sim.window[0], sim.window[1]);
    let opts = RunOptions { t_end: sim.t_end, dt: sim.dt, cadence: sim.cadence };
    let mut paths = Vec::new();
    let (mut state, setup) = match sim.initial {
        Initial::Planar => {
            let sol = solve_at(cfg, &cfg.params)?;
            (init_planar(&sol, window)?, Err(sol))
        }
        Initial::Corner => {
            let setup = corner_setup(cfg)?;
            paths.push(write_corner(cfg, &setup)?);
            (init_corner(&setup.sol, &setup.pred, window)?, Ok(setup))
        }
    };
    paths.push(write_snapshot(cfg, &state, "snapshot_initial.csv")?);
    let history = integrate(&mut state, &opts)?;
    paths.push(write_snapshot(cfg, &state, "snapshot_final.csv")?);
    paths.push(write_track(cfg, &history, json!({ "dt": history.dt, "level": "midpoint of the far-field limits" }))?);

    let result = match &setup {
        Err(sol) => {
            let track = track_interface(&history)?;
            let (speed, stderr) = measure_speed(&track)?;
            json!({
                "speed": speed,
                "stderr": speed_err(stderr),
                "method": Method::SimulationMeasured.tag(),
                "rows_used": track.rows.len(),
                "rows_excluded": track.excluded_rows,
                "reference": { "c": sol.c(), "method": "travelling-wave solve" },
                "relative_error": (speed - sol.c()).abs() / sol.c().abs(),
            })
        }
        Ok(setup) => {
            let (lo, hi) = flank_rows(window);
            let track = track_rows(&history, |j| (lo..=hi).contains(&j.abs()))?;
            let (speed, stderr) = measure_speed(&track)?;
            // Interface column x_j = -theta_j - c t, so theta slopes are -dx/dj.
            let upper = -track.final_slope(|j| (lo..=hi).contains(&j))?.slope;
            let lower = -track.final_slope(|j| (-hi..=-lo).contains(&j))?.slope;
            let p = &setup.pred;
            json!({
                "speed": speed,
                "stderr": speed_err(stderr),
                "method": Method::SimulationMeasured.tag(),
                "rows": [lo, hi],
                "rows_used": track.rows.len(),
                "rows_excluded": track.excluded_rows,
                "reference": { "c": setup.c_target, "method": "corner prediction c_target" },
                "relative_error": (speed - setup.c_target).abs() / setup.c_target.abs(),
                "theta_slope_upper": upper,
                "theta_slope_lower": lower,
                "predicted_slope_upper": p.end_slope(),
                "predicted_slope_lower": p.start_slope(),
            })
        }
    };
    let meta = metadata(&config_value(cfg), json!({ "dt": history.dt, "snapshots": history.times.len() }));
    paths.push(write_json(&cfg.out, "speed.json", &meta, result)?);
    Ok(paths)
}

fn speed_err(e: f64) -> Value {
    if e.is_finite() {
        json!(e)
    } else {
        Value::Null
    }
}

/// `|j|` range of the flank rows, clipped to the window.
fn flank_rows(window: Window) -> (i64, i64) {
    let half = (window.ny / 2) as i64 - 1;
    if half >= FLANK_ROWS.1 {
        FLANK_ROWS
    } else {
        (half / 3, half)
    }
}

fn hs1(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let h = cfg.hs1.as_ref().expect("hs1 section");
    let sol = solve_at(cfg, &cfg.params)?;
    let report = hs1_scan(&sol, h.omega_points, h.nu_points, h.nu_max);
    let meta = metadata(&config_value(cfg), json!({ "c": sol.c() }));
    let value = json!({ "hs1": report, "min_modulus_positive": report.min_modulus > 0.0 });
    Ok(vec![write_json(&cfg.out, "hs1.json", &meta, value)?])
}

fn bichromatic(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let b = cfg.bichromatic.as_ref().expect("bichromatic section");
    let sol = solve_at(cfg, &cfg.params)?;
    let mut paths = vec![write_wave(cfg, &sol, Value::Null)?];
    match dispersion_report(&sol, false, &cfg.solver) {
        Ok(r) => paths.push(write_dispersion(cfg, &[(r, None)], Value::Null)?),
        Err(e) => paths.push(write_dispersion(cfg, &[], json!({ "error": e.to_string() }))?),
    }
    if let Some([from, to]) = b.alpha_range {
        let dir = (to - from).signum();
        let n = ((to - from).abs() / b.step + 1e-9).floor() as usize;
        let path: Vec<WaveParams> = (1..=n).map(|k| cfg.params.with_alpha(from + dir * k as f64 * b.step)).collect();
        let branch = continue_in(&path, &sol, &cfg.solver);
        let stop = branch.failure.as_ref().map(|(k, e)| json!({ "index": k, "alpha": path[*k].alpha, "error": e.to_string() }));
        let last_alpha = branch.last().map_or(sol.params().alpha, |s| s.params().alpha);
        let meta = metadata(
            &config_value(cfg),
            json!({ "pinned": branch.pinned, "stopped": stop, "last_alpha": last_alpha }),
        );
        let mut table = Table::create(&cfg.out, "bichromatic.csv", &meta, &["alpha", "c", "residual"])?;
        for s in std::iter::once(&sol).chain(&branch.solutions) {
            table.row(&[num(s.params().alpha), num(s.c()), num(s.residual_norm())])?;
        }
        paths.push(table.finish()?);
    }
    Ok(paths)
}
