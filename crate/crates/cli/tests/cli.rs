use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nagumo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nagumo")).args(args).output().expect("binary runs")
}

fn with_config(dir: &Path, json: &str, extra: &[&str]) -> Output {
    let path = dir.join("config.json");
    std::fs::write(&path, json).unwrap();
    let mut args = vec!["--config", path.to_str().unwrap(), "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    nagumo(&args)
}

/// Header metadata and data rows (column names first).
fn read_csv(path: &Path) -> (Value, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().strip_prefix("# ").expect("metadata line");
    let meta: Value = serde_json::from_str(header).unwrap();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (meta, rows)
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let k = rows[0].iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"));
    rows[1..].iter().map(|r| r[k].parse().unwrap()).collect()
}

#[test]
fn zero_detuning_wave_has_zero_speed() {
    let dir = tempfile::tempdir().unwrap();
    let out = with_config(dir.path(), r#"{"command": "wave", "rho": 0, "zeta": 0}"#, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (meta, rows) = read_csv(&dir.path().join("dispersion.csv"));
    assert_eq!(meta["tool"], "nagumo");
    assert_eq!(meta["config"]["params"]["gamma"], 1e-6);
    assert!(column(&rows, "c")[0].abs() <= 1e-6);
    let (_, wave) = read_csv(&dir.path().join("wave.csv"));
    assert_eq!(wave[0], ["xi", "phi", "psi", "corrector"]);
    assert_eq!(wave.len(), 802);
}

#[test]
fn config_errors_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = with_config(dir.path(), r#"{"command": "wave", "rho": 1.5}"#, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rho"));
    let out = with_config(dir.path(), r#"{"command": "wave", "rho": 0.5, "speed": 1}"#, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("speed"));
    let out = nagumo(&["hs1", "--rho", "0.5", "--L", "1.03", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = with_config(dir.path(), r#"{"command": "wave", "rho": 0.1}"#, &["--rho", "-0.9", "--h", "0.1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (meta, rows) = read_csv(&dir.path().join("dispersion.csv"));
    assert_eq!(meta["config"]["params"]["rho"], -0.9);
    assert_eq!(meta["config"]["h"], 0.1);
    assert!(column(&rows, "c")[0] > 1.8);
}

#[test]
fn pinned_wave_exits_with_code_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = nagumo(&["wave", "--rho", "0.02", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn short_run_is_a_tracking_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = with_config(dir.path(), r#"{"command": "simulate", "rho": 0.9, "t_end": 2}"#, &[]);
    assert_eq!(out.status.code(), Some(5), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn hs1_report_is_positive() {
    let dir = tempfile::tempdir().unwrap();
    let out = nagumo(&["hs1", "--rho", "0.9", "--zeta", "0", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("hs1.json")).unwrap()).unwrap();
    assert!(v["hs1"]["min_modulus"].as_f64().unwrap() > 0.0);
    assert_eq!(v["hs1"]["origin_plus"][0].as_f64().unwrap(), 5.0 * (0.9 - 1.0));
    assert_eq!(v["metadata"]["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn sweep_output_is_deterministic_and_ordered() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = r#"{"command": "sweep", "rho": 0.9, "zeta_range": [0, 0.1], "step": 0.01}"#;
    assert!(with_config(a.path(), cfg, &["--jobs", "1"]).status.success());
    assert!(with_config(b.path(), cfg, &["--jobs", "3"]).status.success());
    for name in ["dispersion.csv", "polar.csv"] {
        let body = |d: &Path| {
            let t = std::fs::read_to_string(d.join(name)).unwrap();
            t.split_once('\n').unwrap().1.to_string()
        };
        assert_eq!(body(a.path()), body(b.path()), "{name}");
    }
    let (meta, rows) = read_csv(&a.path().join("dispersion.csv"));
    assert_eq!(meta["meta"]["planned_solves"], 11);
    let zeta = column(&rows, "zeta");
    assert!(zeta.windows(2).all(|w| w[1] > w[0]));
    // Interior rows carry the five-point differences of the sweep itself.
    let k = rows[0].iter().position(|c| c == "fd_method").unwrap();
    assert_eq!(rows[3][k], "finite-difference");
    assert_eq!(rows[1][k], "");
    let (_, polar) = read_csv(&a.path().join("polar.csv"));
    let c = column(&rows, "c");
    let x = column(&polar, "x");
    assert!((x[0] + c[0]).abs() < 1e-15);
}

#[test]
fn corner_table_has_monotone_kappa() {
    let dir = tempfile::tempdir().unwrap();
    let out = with_config(dir.path(), r#"{"command": "corner", "rho": 0.9, "l_seq": 200}"#, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (meta, rows) = read_csv(&dir.path().join("corner.csv"));
    assert_eq!(meta["meta"]["theta_closure"], "anchored-affine");
    assert_eq!(rows[0], ["l", "kappa", "theta", "slope"]);
    let kappa = column(&rows, "kappa");
    assert!(kappa.windows(2).all(|w| w[1] <= w[0]));
    let phi_minus = meta["meta"]["phi_minus"].as_f64().unwrap();
    assert!((kappa[kappa.len() - 1] - phi_minus.tan()).abs() < 1e-2);
}

#[test]
fn bichromatic_wave_and_alpha_continuation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"command": "bichromatic", "rho": 0, "alpha_range": [0.08, 0.076], "step": 0.002}"#;
    let out = with_config(dir.path(), cfg, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, wave) = read_csv(&dir.path().join("wave.csv"));
    assert_eq!(wave[0][1..3], ["phi_u".to_string(), "phi_v".to_string()]);
    let (_, rows) = read_csv(&dir.path().join("bichromatic.csv"));
    let c = column(&rows, "c");
    assert_eq!(c.len(), 3);
    // Lower diffusion slows the wave towards pinning.
    assert!(c.windows(2).all(|w| w[1].abs() < w[0].abs()));
}

#[test]
fn corner_pipeline_matches_target_speed() {
    let dir = tempfile::tempdir().unwrap();
    let out = with_config(dir.path(), r#"{"command": "simulate", "rho": 0.9, "zeta": 0, "initial": "corner"}"#, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("speed.json")).unwrap()).unwrap();
    assert_eq!(v["method"], "simulation-measured");
    assert!(v["relative_error"].as_f64().unwrap() < 2e-2, "{v}");
    for side in ["upper", "lower"] {
        let measured = v[format!("theta_slope_{side}")].as_f64().unwrap();
        let predicted = v[format!("predicted_slope_{side}")].as_f64().unwrap();
        assert!((measured - predicted).abs() < 0.1 * predicted.abs(), "{side}: {measured} vs {predicted}");
    }
    assert!(dir.path().join("snapshot_final.csv").exists());
}
