use std::path::Path;
use std::process::{Command, Output};

fn thermoptic(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thermoptic"))
        .args(args)
        .current_dir(dir)
        .env_remove("THERMOPTIC_THREADS")
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path, out: &str) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join(format!("{out}.manifest.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn temp_variance_writes_csv_summary_and_stable_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["temp-variance", "--grid", "16", "--out", "tv.csv"];
    assert_eq!(thermoptic(&args, dir.path()).status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("tv.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("nu1_hz,nu2_hz,ln_var_T"));
    assert_eq!(lines.count(), 256);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("tv.csv.summary.json")).unwrap()).unwrap();
    assert!(summary["min_ln_var_T"].as_f64().unwrap().is_finite());
    let first = manifest(dir.path(), "tv.csv");
    assert_eq!(first["subcommand"], "temp-variance");
    assert_eq!(first["parameters"]["grid"], 16);
    assert_eq!(thermoptic(&args, dir.path()).status.code(), Some(0));
    assert_eq!(first["outputs"], manifest(dir.path(), "tv.csv")["outputs"]);
}

#[test]
fn opt_freq_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = thermoptic(&["opt-freq", "--temp", "5000", "--temp", "20000", "--out", "f.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("f.json")).unwrap()).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert!((r["nu1_over_T"].as_f64().unwrap() / 1.188e10 - 1.0).abs() < 0.01);
        assert!((r["nu2_over_T"].as_f64().unwrap() / 1.118e11 - 1.0).abs() < 0.01);
    }
}

#[test]
fn spatial_maps_mark_absent_cells_and_record_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = thermoptic(&["spatial-map", "--scheme", "weighted", "--grid", "7", "--out", "w.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("w.csv")).unwrap();
    let mut rows = csv.lines();
    assert_eq!(rows.next(), Some("gamma_cos,gamma_sin,ratio"));
    let values: Vec<&str> = rows.map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(values.len(), 49);
    // centre cell |γ| = 0
    assert_eq!(values[24], "");
    for v in values.iter().filter(|v| !v.is_empty()) {
        let x: f64 = v.parse().unwrap();
        assert!((4.5..=5.0 + 1e-6).contains(&x));
    }

    let args = ["spatial-map", "--scheme", "rp", "--grid", "5", "--seed", "9", "--n-phases", "8", "--n-trials", "3", "--out", "rp.csv"];
    assert_eq!(thermoptic(&args, dir.path()).status.code(), Some(0));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("rp.csv.meta.json")).unwrap()).unwrap();
    assert_eq!((meta["n_phases"].as_u64(), meta["n_trials"].as_u64(), meta["seed"].as_u64()), (Some(8), Some(3), Some(9)));
    let before = std::fs::read(dir.path().join("rp.csv")).unwrap();
    assert_eq!(thermoptic(&args, dir.path()).status.code(), Some(0));
    assert_eq!(before, std::fs::read(dir.path().join("rp.csv")).unwrap());
}

#[test]
fn povm_search_reports_gap() {
    let dir = tempfile::tempdir().unwrap();
    let out = thermoptic(&["povm-search", "--restarts", "4", "--seed", "3", "--out", "p.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("p.json")).unwrap()).unwrap();
    assert!(v["best_cost"].as_f64().unwrap() >= 4.5 * (1.0 - 1e-6));
    assert!(v["gap"].as_f64().unwrap().abs() <= 0.02);
    assert_eq!(v["povm"]["u1"].as_array().unwrap().len(), 3);
    assert_eq!(manifest(dir.path(), "p.json")["seed"], 3);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(thermoptic(&["temp-variance", "--grid", "4", "--out", "x.csv"], d).status.code(), Some(1));
    assert_eq!(thermoptic(&["temp-variance", "--temp", "-3", "--out", "x.csv"], d).status.code(), Some(1));
    assert_eq!(thermoptic(&["no-such-command"], d).status.code(), Some(1));
    assert_eq!(thermoptic(&["temp-variance", "--out", "missing/dir/x.csv"], d).status.code(), Some(2));
    assert_eq!(thermoptic(&["verify", "--suite", "core"], d).status.code(), Some(0));
    let tampered = thermoptic(&["verify", "--suite", "core", "--tolerance-scale", "0"], d);
    assert_eq!(tampered.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&tampered.stderr).contains("verification_failed"));
}

#[test]
fn thread_cap_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_thermoptic"))
            .args(["verify", "--suite", "core"])
            .current_dir(dir.path())
            .env("THERMOPTIC_THREADS", v)
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(run("1"), Some(0));
    assert_eq!(run("0"), Some(1));
    assert_eq!(run("many"), Some(1));
}
