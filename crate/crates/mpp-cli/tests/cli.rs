//! End-to-end tests of the `mpp` binary: exit codes, determinism, artifacts.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mpp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, content: &str) {
    fs::write(path, content).unwrap();
}

#[test]
fn simulate_default_config_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(&cfg, r#"{"duration": 2.0}"#);
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");

    for out in [&out_a, &out_b] {
        let r = mpp(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    let a = fs::read(&out_a).unwrap();
    let b = fs::read(&out_b).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "simulate output must be byte-identical");
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("t,x_follower,x_leader,v,v_leader,z,a,phase\n"));
}

#[test]
fn simulate_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(&cfg, r#"{"duration": 0.1, "stride": 10}"#);
    let r = mpp(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(r.status.success());
    assert!(String::from_utf8_lossy(&r.stdout).lines().count() > 2);
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(&cfg, r#"{"params": {"zeta_min": 9}}"#);
    let r = mpp(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("zeta > zeta_min violated"));

    let r = mpp(&["simulate", "--config", "/does/not/exist.json"]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let r = mpp(&["fd", "--bogus"]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn fd_and_slvp_and_phase_map_emit_csv() {
    let r = mpp(&["fd", "--points", "50"]);
    assert!(r.status.success());
    let text = String::from_utf8(r.stdout).unwrap();
    assert!(text.starts_with("k,v,q\n"));
    assert_eq!(text.lines().count(), 51);

    let r = mpp(&["slvp", "--v0", "30", "--points", "10"]);
    assert!(r.status.success());
    assert!(String::from_utf8_lossy(&r.stdout).starts_with("v,a,z,b,jerk\n"));

    let r = mpp(&[
        "phase-map", "--v-leader", "0", "--nv", "5", "--nz", "5", "--v-max", "35", "--z-max",
        "400",
    ]);
    assert!(r.status.success());
    let text = String::from_utf8(r.stdout).unwrap();
    assert!(text.starts_with("v,z,v_leader,phase_name\n"));
    assert_eq!(text.lines().count(), 26);
}

#[test]
fn verify_passes_and_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let r = Command::new(env!("CARGO_BIN_EXE_mpp"))
        .args([
            "verify",
            "--suite",
            "boundary",
            "--cases",
            "100",
            "--seed",
            "7",
            "--out",
            report_path.to_str().unwrap(),
        ])
        .env("MPP_THREADS", "1")
        .output()
        .unwrap();
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["suite"], "boundary");
    assert_eq!(report["passed"], true);

    let r = mpp(&["verify", "--suite", "nonsense"]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn replicate_fig_writes_artifacts_with_expected_summary() {
    let dir = tempfile::tempdir().unwrap();
    let r = mpp(&["replicate-fig", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));

    for name in [
        "run.csv",
        "speed_time.csv",
        "speed_spacing.csv",
        "accel_time.csv",
        "accel_spacing.csv",
        "phase_trajectory.csv",
        "phase_trajectory_last20s.csv",
        "summary.json",
    ] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    let peak = summary["peak_speed_kmh"].as_f64().unwrap();
    assert!((106.0..=110.0).contains(&peak), "peak {peak}");
    let stop = summary["stopping_distance_m"].as_f64().unwrap();
    assert!((297.0..=307.0).contains(&stop), "stop {stop}");
    let min_a = summary["min_accel"].as_f64().unwrap();
    assert!((-1.67..=-1.5).contains(&min_a), "min accel {min_a}");
    let z = summary["final_spacing_m"].as_f64().unwrap();
    assert!((z - 5.0).abs() <= 0.05, "final spacing {z}");
}
