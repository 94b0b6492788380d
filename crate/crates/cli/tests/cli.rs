//! End-to-end tests of the binary: exit codes, report contents, file
//! outputs.

use std::path::Path;
use std::process::{Command, Output};

fn donorspin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_donorspin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

const PHOSPHORUS: &str = "\
A_MHz = 120
B_T = 1.0
temperature_K = 1.0
gamma_e_override_rad_s = 1.76e11
B_perp_G = 0.3
f_esr_GHz = 28.0
current_uA = 1.0
";

#[test]
fn rates_reports_microsecond_initialization_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "p.cfg", PHOSPHORUS);
    let out = donorspin(&["rates", "--config", &cfg]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let t1n_us = report["t1n_peak"]["min_t1n_s"].as_f64().unwrap() * 1e6;
    assert!((1.0..1.5).contains(&t1n_us), "T1n = {t1n_us} us");
    // Polarization magnitude reported separately from the signed value.
    assert!(report["p_e"].as_f64().unwrap() < 0.0);
    assert!(report["polarization_magnitude"].as_f64().unwrap() > 0.0);
}

#[test]
fn missing_rate_source_is_a_validation_error() {
    let out = donorspin(&[
        "rates",
        "--set",
        "A_MHz=120",
        "--set",
        "B_T=1",
        "--set",
        "temperature_K=1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("gamma_e unavailable"), "stderr: {stderr}");
}

#[test]
fn screened_regime_is_refused() {
    let out = donorspin(&[
        "rates",
        "--set",
        "A_MHz=120",
        "--set",
        "B_T=1",
        "--set",
        "temperature_K=0.05",
        "--set",
        "T_kondo_K=0.1",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("kondo screened"), "stderr: {stderr}");
}

#[test]
fn trajectory_free_precession_traces_cosine() {
    // No coupling, no damping: the Sx column is cos(omega_e t)/2.
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("t.csv");
    let out = donorspin(&[
        "trajectory",
        "--set",
        "dimensionless=true",
        "--set",
        "omega_e=25",
        "--set",
        "A=0",
        "--set",
        "gamma_e=0",
        "--state",
        "0.5,0,0,0,0,0,0,0,0,0,0,0,0,0,0",
        "--t-end",
        "1.0",
        "--samples",
        "20",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,Sx,Sy,Sz,Ix,Iy,Iz,SIxx,SIxy,SIxz,SIyx,SIyy,SIyz,SIzx,SIzy,SIzz"
    );
    for line in lines {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells.len(), 16);
        let (t, sx) = (cells[0], cells[1]);
        assert!(
            (sx - 0.5 * (25.0 * t).cos()).abs() < 1e-7,
            "t={t}, sx={sx}"
        );
    }
    // Sidecar exists and records the solver.
    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("t.csv.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["solver"], "bloch");
    assert_eq!(meta["command"], "trajectory");
}

#[test]
fn trajectory_both_solvers_agree() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("b.csv");
    let out = donorspin(&[
        "trajectory",
        "--set",
        "dimensionless=true",
        "--set",
        "omega_e=50",
        "--set",
        "gamma_e=1",
        "--set",
        "p_e=-0.5",
        "--state",
        "iz_up+thermal_e",
        "--t-end",
        "5",
        "--samples",
        "25",
        "--solver",
        "both",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["max_deviation"].as_f64().unwrap() < 1e-8);
    assert!(dir.path().join("b.bloch.csv").exists());
    assert!(dir.path().join("b.lindblad.csv").exists());
}

#[test]
fn trajectory_nuclear_polarization_relaxes() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("iz.csv");
    let out = donorspin(&[
        "trajectory",
        "--set",
        "dimensionless=true",
        "--set",
        "omega_e=20",
        "--set",
        "gamma_e=1",
        "--set",
        "p_e=-0.5",
        "--state",
        "iz_up+thermal_e",
        "--t-end",
        "6000",
        "--samples",
        "50",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let last = text.lines().last().unwrap();
    let iz: f64 = last.split(',').nth(6).unwrap().parse().unwrap();
    assert!((iz - (-0.25)).abs() < 5e-3, "Iz column ends at {iz}");
}

#[test]
fn invalid_state_preset_rejected() {
    let out = donorspin(&[
        "trajectory",
        "--set",
        "dimensionless=true",
        "--set",
        "omega_e=10",
        "--set",
        "gamma_e=1",
        "--state",
        "sideways",
        "--t-end",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_peaks_at_the_expected_grid_points() {
    // Exchange-rate sweep at fixed large flip-flop frequency: the flip
    // rate peaks near sqrt(A^2/2 + Btilde^2), the decoherence rate near
    // A/sqrt(2).
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("s.csv");
    let out = donorspin(&[
        "sweep",
        "--set",
        "dimensionless=true",
        "--set",
        "omega_e=233.16",
        "--set",
        "gamma_e=1",
        "--set",
        "p_e=-0.5",
        "--sweep",
        "gamma_e",
        "--from",
        "0.01",
        "--to",
        "1000",
        "--points",
        "49",
        "--log",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 49);

    let col = |row: &Vec<&str>, k: usize| -> f64 { row[k].parse().unwrap() };
    let argmax = |k: usize| -> f64 {
        rows.iter()
            .max_by(|a, b| col(a, k).partial_cmp(&col(b, k)).unwrap())
            .map(|r| col(r, 0))
            .unwrap()
    };
    let b_tilde: f64 = 233.16 * (1.0 + 17.23e6 / 28.0e9);
    let g_star_t1n = (0.5 + b_tilde * b_tilde).sqrt();
    // inv_t2n column index 7, inv_t1n column index 8.
    let peak_t2n = argmax(7);
    let peak_t1n = argmax(8);
    assert!(
        (peak_t2n.ln() - (1.0 / 2.0_f64.sqrt()).ln()).abs() < 0.3,
        "1/T2n peak at {peak_t2n}"
    );
    assert!(
        (peak_t1n.ln() - g_star_t1n.ln()).abs() < 0.3,
        "1/T1n peak at {peak_t1n} vs {g_star_t1n}"
    );
}

#[test]
fn sweep_with_fits_matches_analytic_rates() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("f.csv");
    let out = donorspin(&[
        "sweep",
        "--set",
        "dimensionless=true",
        "--set",
        "omega_e=50",
        "--set",
        "gamma_e=1",
        "--set",
        "p_e=-0.5",
        "--sweep",
        "gamma_e",
        "--from",
        "3",
        "--to",
        "30",
        "--points",
        "5",
        "--log",
        "--fit",
        "--rel-tol",
        "1e-10",
        "--abs-tol",
        "1e-13",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let tol = 5.0 * (1.0_f64 / 50.0).powi(2);
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.last().unwrap(), &"ok", "row: {line}");
        let inv_t1n: f64 = cells[8].parse().unwrap();
        let fitted: f64 = cells[12].parse().unwrap();
        let rel = (fitted - inv_t1n).abs() / inv_t1n;
        assert!(rel < tol, "fitted {fitted} vs analytic {inv_t1n} (rel {rel:e})");
        // The decoherence-rate fit is only asymptotically comparable to
        // its closed form; here just require it fitted cleanly.
        let fitted_t2n: f64 = cells[10].parse().unwrap();
        assert!(fitted_t2n > 0.0);
    }
}

#[test]
fn sensitivity_matches_reference_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "p.cfg", PHOSPHORUS);
    let out = donorspin(&["sensitivity", "--config", &cfg, "--attest-linewidth"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let threshold = report["threshold"].as_f64().unwrap();
    assert!((2.6e-6..3.1e-6).contains(&threshold), "threshold {threshold}");
    assert!(report["pass"].as_bool().unwrap());
    let margin = report["margin"].as_f64().unwrap();
    assert!((1.0..3.0).contains(&margin), "margin {margin}");
    assert!((report["resonance_splitting_t"].as_f64().unwrap() - 4.2857e-3).abs() < 1e-6);

    // Doubling the current scales the threshold by 1/sqrt(2).
    let out2 = donorspin(&[
        "sensitivity",
        "--config",
        &cfg,
        "--set",
        "current_uA=2.0",
        "--attest-linewidth",
    ]);
    let report2: serde_json::Value = serde_json::from_slice(&out2.stdout).unwrap();
    let threshold2 = report2["threshold"].as_f64().unwrap();
    assert!((threshold2 * 2.0_f64.sqrt() - threshold).abs() / threshold < 1e-12);
}

#[test]
fn sensitivity_applies_recombination_substitution() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "r.cfg",
        &format!("{PHOSPHORUS}gamma_i_per_s = 2e6\ngamma_c_per_s = 2e6\n"),
    );
    let out = donorspin(&["sensitivity", "--config", &cfg]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["recombination_applied"].as_bool().unwrap());
    // Threshold now equals the shot-noise floor over the substituted
    // flip time.
    let thr = report["threshold"].as_f64().unwrap();
    let shot = report["shot_noise_relative"].as_f64().unwrap();
    assert!((thr - shot).abs() / shot < 1e-12);
}

#[test]
fn compare_passes_and_detects_corruption() {
    let args = [
        "compare",
        "--set",
        "dimensionless=true",
        "--set",
        "omega_e=30",
        "--set",
        "gamma_e=1.5",
        "--set",
        "p_e=-0.4",
        "--n",
        "3",
    ];
    let out = donorspin(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["pass"].as_bool().unwrap());
    assert!(report["max_deviation"].as_f64().unwrap() < 1e-8);

    let mut corrupted: Vec<&str> = args.to_vec();
    corrupted.push("--corrupt-sign");
    let out = donorspin(&corrupted);
    assert_eq!(out.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("solver_deviation"), "stderr: {stderr}");
}

#[test]
fn dimensionless_rejects_physical_keys() {
    let out = donorspin(&[
        "rates",
        "--set",
        "dimensionless=true",
        "--set",
        "omega_e=50",
        "--set",
        "B_T=1.0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not valid"));
}
