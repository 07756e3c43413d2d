//! End-to-end tests of the `rhoj` binary: exit codes, report contents,
//! and dump determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const REFERENCE: &str = "\
state.sigma = 1.0
state.k = 2.0
constants.hbar = 1.0
constants.mass = 1.0
kernel.gamma = 0.5
kernel.lambda = 0.5
sampling.n_trials = 100000
sampling.seed = 42
sampling.n_bins = 64
";

fn rhoj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rhoj"))
        .args(args)
        .output()
        .expect("binary should start")
}

fn write_config(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_reference_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "ref.conf", REFERENCE);
    let out = dir.path().join("out");
    let result = rhoj(&["run", "--config", &config, "--out-dir", out.to_str().unwrap()]);
    assert!(result.status.success(), "{result:?}");

    let csv = fs::read_to_string(out.join("fields.csv")).unwrap();
    assert!(csv.starts_with("x,rho_in,j_in,rho_out,j_out\n"));
    assert_eq!(csv.lines().count(), 4097);

    let report = read_json(&out.join("report.json"));
    assert_eq!(report["ideal_measurement"], Value::Bool(false));
    let indicators = &report["indicators"];
    assert!(indicators["eps_mean_x"].as_f64().unwrap() <= 1e-8);
    let eps_std_x = indicators["eps_std_x"].as_f64().unwrap();
    assert!((eps_std_x - 0.11803).abs() < 1e-4, "eps_std_x = {eps_std_x}");
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["pass"] == Value::Bool(true)));
}

#[test]
fn field_dumps_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "ref.conf", REFERENCE);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let result = rhoj(&["run", "--config", &config, "--out-dir", out.to_str().unwrap()]);
        assert!(result.status.success());
    }
    assert_eq!(
        fs::read(out_a.join("fields.csv")).unwrap(),
        fs::read(out_b.join("fields.csv")).unwrap()
    );
    assert_eq!(
        fs::read(out_a.join("report.json")).unwrap(),
        fs::read(out_b.join("report.json")).unwrap()
    );
}

#[test]
fn ideal_measurement_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "ideal.conf", "state.sigma = 1.0\nstate.k = 2.0\n");
    let out = dir.path().join("out");
    let result = rhoj(&["run", "--config", &config, "--out-dir", out.to_str().unwrap()]);
    assert!(result.status.success());
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["ideal_measurement"], Value::Bool(true));
    for key in ["eps_mean_x", "eps_mean_p", "eps_corr_xp", "eps_std_x", "eps_std_p", "w"] {
        assert!(report["indicators"][key].as_f64().unwrap() <= 1e-8, "{key}");
    }
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "bad.conf", "state.sigma = 1.0\nstate.wobble = 2\n");
    let out = dir.path().join("out");
    let result = rhoj(&["run", "--config", &config, "--out-dir", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
    assert!(!out.exists(), "no output files on config errors");
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("state.wobble"), "{stderr}");
}

#[test]
fn missing_config_flag_exits_2() {
    let result = rhoj(&["run"]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn grid_points_override_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "ref.conf", REFERENCE);
    let out = dir.path().join("out");
    // Not a power of two: configuration-class failure.
    let result = rhoj(&[
        "run", "--config", &config, "--out-dir", out.to_str().unwrap(), "--grid-points", "3000",
    ]);
    assert_eq!(result.status.code(), Some(2));

    let result = rhoj(&[
        "run", "--config", &config, "--out-dir", out.to_str().unwrap(), "--grid-points", "2048",
    ]);
    assert!(result.status.success());
    let csv = fs::read_to_string(out.join("fields.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2049);
}

#[test]
fn verify_reference_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "ref.conf", REFERENCE);
    let out = dir.path().join("out");
    let result = rhoj(&["verify", "--config", &config, "--out-dir", out.to_str().unwrap()]);
    assert!(result.status.success(), "{result:?}");
    let report = read_json(&out.join("verify.json"));
    assert_eq!(report["pass"], Value::Bool(true));
    // The alternate-vs-derived spread comparison is recorded for every pair.
    assert_eq!(report["spread_forms"].as_array().unwrap().len(), 9);
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("alternate-form momentum spread differs"));
}

#[test]
fn verify_oscillator_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "osc.conf",
        "state.omega = 1.0\nkernel.gamma = 0.7071067811865476\n",
    );
    let out = dir.path().join("out");
    let result = rhoj(&["verify", "--config", &config, "--out-dir", out.to_str().unwrap()]);
    assert!(result.status.success(), "{result:?}");
    let report = read_json(&out.join("verify.json"));
    let comparisons = report["comparisons"].as_array().unwrap();
    assert!(comparisons.iter().any(|c| c["quantity"]
        .as_str()
        .unwrap()
        .contains("mean_h_out")));
}

#[test]
fn sample_reference_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "ref.conf", REFERENCE);
    let out = dir.path().join("out");
    let result = rhoj(&["sample", "--config", &config, "--out-dir", out.to_str().unwrap()]);
    assert!(result.status.success(), "{result:?}");
    let report = read_json(&out.join("sample.json"));
    assert_eq!(report["pass"], Value::Bool(true));
    assert!(report["position"]["z_mean"].as_f64().unwrap() <= 5.0);
    assert!(report["momentum"]["std_rel_error"].as_f64().unwrap() <= 0.03);
    assert!(report["position_histogram"]["mean_identity_defect"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn sample_statistical_failure_exits_1() {
    // 100 trials cannot meet the 3% spread criterion with this seed; the
    // command reports the failure through its exit code.
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "tiny.conf",
        "state.sigma = 1.0\nstate.k = 2.0\nkernel.gamma = 0.5\nkernel.lambda = 0.5\n\
         sampling.n_trials = 100\nsampling.seed = 1\n",
    );
    let out = dir.path().join("out");
    let result = rhoj(&["sample", "--config", &config, "--out-dir", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
    // The report is still written, with pass = false.
    let report = read_json(&out.join("sample.json"));
    assert_eq!(report["pass"], Value::Bool(false));
}

#[test]
fn sample_ideal_and_oscillator_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let ideal = write_config(
        dir.path(),
        "ideal.conf",
        "state.sigma = 1.0\nstate.k = 2.0\nsampling.n_trials = 100000\nsampling.seed = 42\n",
    );
    let osc = write_config(
        dir.path(),
        "osc.conf",
        "state.omega = 1.0\nkernel.gamma = 0.7071067811865476\n\
         sampling.n_trials = 100000\nsampling.seed = 42\n",
    );
    for config in [&ideal, &osc] {
        let out = dir.path().join("out");
        let result = rhoj(&["sample", "--config", config, "--out-dir", out.to_str().unwrap()]);
        assert!(result.status.success(), "{config}: {result:?}");
        let report = read_json(&out.join("sample.json"));
        assert_eq!(report["pass"], Value::Bool(true), "{config}");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "ref.conf", REFERENCE);
    let out = dir.path().join("out");
    let result = rhoj(&[
        "sample", "--config", &config, "--out-dir", out.to_str().unwrap(), "--seed", "7",
    ]);
    assert!(result.status.success());
    let report = read_json(&out.join("sample.json"));
    assert_eq!(report["position"]["seed"].as_u64(), Some(7));
}

#[test]
fn sweep_reference_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "ref.conf", REFERENCE);
    let out = dir.path().join("out");
    let result = rhoj(&["sweep", "--config", &config, "--out-dir", out.to_str().unwrap()]);
    assert!(result.status.success(), "{result:?}");

    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 9);
    for row in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        let gamma: f64 = fields[0].parse().unwrap();
        let lambda: f64 = fields[1].parse().unwrap();
        let w: f64 = fields[7].parse().unwrap();
        assert!(w >= 0.0);
        if gamma == 0.0 && lambda == 0.0 {
            assert_eq!(w, 0.0);
        }
        if gamma == 0.5 && lambda == 0.5 {
            assert!((w - 0.006231).abs() < 1e-5, "w = {w}");
        }
        assert_eq!(fields[10], "true");
    }
}

#[test]
fn calibrate_round_trip_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    // Observations generated at gamma = lambda = 0.5 for the reference packet.
    let config = write_config(
        dir.path(),
        "cal.conf",
        "state.sigma = 1.0\nstate.k = 2.0\n\
         observed.std_x = 1.118033988749895\nobserved.std_p = 0.4472135954999579\n",
    );
    let out = dir.path().join("out");
    let result = rhoj(&["calibrate", "--config", &config, "--out-dir", out.to_str().unwrap()]);
    assert!(result.status.success(), "{result:?}");
    let report = read_json(&out.join("calibration.json"));
    let gamma = report["fitted_gamma"].as_f64().unwrap();
    let lambda = report["fitted_lambda"].as_f64().unwrap();
    assert!((gamma - 0.5).abs() <= 1e-4 * 0.5, "gamma = {gamma}");
    assert!((lambda - 0.5).abs() <= 1e-4 * 0.5, "lambda = {lambda}");

    // Observed spread below the intrinsic width: infeasible.
    let config = write_config(
        dir.path(),
        "cal_bad.conf",
        "state.sigma = 1.0\nstate.k = 2.0\nobserved.std_x = 0.9\n",
    );
    let result = rhoj(&["calibrate", "--config", &config, "--out-dir", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));

    // Zero wavenumber: the current channel is unidentifiable.
    let config = write_config(
        dir.path(),
        "cal_k0.conf",
        "state.sigma = 1.0\nobserved.std_x = 1.118033988749895\nobserved.std_p = 0.5\n",
    );
    let result = rhoj(&["calibrate", "--config", &config, "--out-dir", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("unidentifiable"), "{stderr}");
}
