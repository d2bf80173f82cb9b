use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn filament(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_filament"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_column(path: &Path, name: &str) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(k).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn profile_writes_artifacts_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = filament(
        dir.path(),
        &["profile", "--a", "0.5", "--S", "50", "--out", "run"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let run = dir.path().join("run");
    assert!(run.join("profile.csv").exists());
    let summary = json(&run.join("summary.json"));
    assert!((summary["cross_norm"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    let m = json(&run.join("manifest.json"));
    assert_eq!(m["subcommand"], "profile");
    assert_eq!(m["parameters"]["a"].as_f64(), Some(0.5));
    assert_eq!(m["parameters"]["S"].as_f64(), Some(50.0));
    let artifacts = m["artifacts"].as_array().unwrap();
    assert!(artifacts
        .iter()
        .any(|a| a.as_str().unwrap().contains("profile.csv")));
}

#[test]
fn reruns_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["r1", "r2"] {
        let o = filament(
            dir.path(),
            &["momentum", "--S", "40", "--t", "1,0.25", "--out", out],
        );
        assert_eq!(code(&o), 0);
    }
    for f in ["momentum.csv", "manifest.json"] {
        let a = fs::read(dir.path().join("r1").join(f)).unwrap();
        let b = fs::read(dir.path().join("r2").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between runs");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["corners", "--a", "0.3,0.5", "--S", "30,60"];
    for (out, threads) in [("t1", "1"), ("t3", "3")] {
        let mut v = args.to_vec();
        v.extend(["--threads", threads, "--out", out]);
        assert_eq!(code(&filament(dir.path(), &v)), 0);
    }
    let a = fs::read(dir.path().join("t1/corners.csv")).unwrap();
    let b = fs::read(dir.path().join("t3/corners.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&filament(dir.path(), &["nonsense"])), 1);
    assert_eq!(code(&filament(dir.path(), &["profile", "--bogus", "1"])), 1);
    assert_eq!(code(&filament(dir.path(), &["profile", "--a", "half"])), 1);
    assert_eq!(code(&filament(dir.path(), &["--help"])), 0);
}

#[test]
fn invalid_parameters_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = filament(dir.path(), &["profile", "--a", "-1", "--out", "x"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("a must lie in"));
    assert_eq!(code(&filament(dir.path(), &["bflow", "--t", "7pi"])), 2);
    assert_eq!(
        code(&filament(dir.path(), &["trace", "--fhat", "triangle:1"])),
        2
    );
    assert_eq!(
        code(&filament(
            dir.path(),
            &["profile", "--config", "missing.json"]
        )),
        2
    );
}

#[test]
fn numerical_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = filament(
        dir.path(),
        &[
            "bflow", "--n", "96", "--t", "0.1", "--dt", "0.00214", "--out", "x",
        ],
    );
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("cfg.json"),
        r#"{"version": 1, "a": 0.3, "S": 40, "format": "json", "out": "from-config"}"#,
    )
    .unwrap();
    let o = filament(
        dir.path(),
        &["profile", "--config", "cfg.json", "--a", "0.4"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let run = dir.path().join("from-config");
    let m = json(&run.join("manifest.json"));
    assert_eq!(m["parameters"]["a"].as_f64(), Some(0.4));
    assert_eq!(m["parameters"]["S"].as_f64(), Some(40.0));
    assert_eq!(m["format"], "json");
    let table = json(&run.join("profile.json"));
    assert_eq!(table["columns"][0], "s");
}

#[test]
fn config_file_rejects_unknown_keys_and_versions() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bad.json"),
        r#"{"a": 0.3, "colour": "red"}"#,
    )
    .unwrap();
    fs::write(dir.path().join("future.json"), r#"{"version": 99}"#).unwrap();
    fs::write(dir.path().join("broken.json"), "{ not json").unwrap();
    for f in ["bad.json", "future.json", "broken.json"] {
        let o = filament(dir.path(), &["profile", "--config", f, "--out", "x"]);
        assert_eq!(code(&o), 2, "{f}");
    }
}

#[test]
fn small_polygon_flow_runs() {
    let dir = tempfile::tempdir().unwrap();
    let o = filament(
        dir.path(),
        &["bflow", "--n", "96", "--t", "1/100", "--out", "b"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&dir.path().join("b/bflow_summary.json"));
    assert!((s["t"].as_f64().unwrap() - 0.01).abs() < 1e-15);
    assert!(s["momentum_drift"].as_f64().unwrap() < 1e-2);
    assert_eq!(
        csv_column(&dir.path().join("b/snapshot.csv"), "s").len(),
        96
    );
}

#[test]
fn talbot_reports_each_requested_time() {
    let dir = tempfile::tempdir().unwrap();
    let o = filament(
        dir.path(),
        &["talbot", "--n", "96", "--pq", "1/4,1/8", "--out", "tb"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let q = csv_column(&dir.path().join("tb/talbot.csv"), "q");
    assert_eq!(q, vec![8.0, 4.0]);
    assert!(dir.path().join("tb/snapshot_1_4.csv").exists());
}

#[test]
fn nls_with_zero_datum_stays_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = filament(
        dir.path(),
        &[
            "nls",
            "--L",
            "32",
            "--n",
            "128",
            "--datum",
            "zero",
            "--tau-max",
            "4",
            "--record",
            "2,3",
            "--out",
            "n",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let l2 = csv_column(&dir.path().join("n/diagnostics.csv"), "l2");
    assert!(!l2.is_empty());
    assert!(l2.iter().all(|v| *v == 0.0));
    assert!(dir.path().join("n/scatter.json").exists());
    assert!(dir.path().join("n/u_tau_2.csv").exists());
}

#[test]
fn xnorm_of_a_gaussian() {
    let dir = tempfile::tempdir().unwrap();
    let o = filament(
        dir.path(),
        &["xnorm", "--datum", "gaussian:1,1", "--out", "xn"],
    );
    assert_eq!(code(&o), 0);
    let v = json(&dir.path().join("xn/xnorm.json"));
    // ‖e^{-x²}‖_{L²} = (π/2)^{1/4}
    let l2 = v["l2"].as_f64().unwrap();
    assert!(
        (l2 - (std::f64::consts::PI / 2.0).powf(0.25)).abs() < 1e-10,
        "{l2}"
    );
    assert!(v["value"].as_f64().unwrap() > l2);
}
