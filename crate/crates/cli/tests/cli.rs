use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ggwave(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ggwave"))
        .args(args)
        .env("GGWAVE_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(o: &Output, key: &str) -> String {
    let prefix = format!("{key}=");
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&prefix).map(str::to_string))
        .unwrap_or_else(|| panic!("no {key} in {}", stdout(o)))
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

/// Every listed output exists and is a CSV with a header and numeric-looking rows.
fn assert_complete(dir: &Path) {
    let m = manifest(dir);
    for name in m["outputs"].as_array().unwrap() {
        let text = std::fs::read_to_string(dir.join(name.as_str().unwrap())).unwrap();
        let mut lines = text.lines();
        let columns = lines.next().unwrap().split(',').count();
        for line in lines {
            assert_eq!(line.split(',').count(), columns, "{name}: {line}");
        }
    }
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
}

fn write_sweep(dir: &Path, body: &str) -> String {
    let path = dir.join("sweep.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn gap_of_the_strong_acid_benchmark() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ggwave(&["gap", "--alpha", "15", "--gamma", "0.5"], tmp.path());
    assert!(o.status.success());
    let gap: f64 = value(&o, "predicted_gap").parse().unwrap();
    assert!((gap - 2.8496).abs() < 1e-4, "{gap}");
    assert_eq!(value(&o, "z_plus"), value(&o, "predicted_gap"));
    let mid = ggwave(&["gap", "--alpha", "1.5", "--gamma", "0.5"], tmp.path());
    assert_eq!(value(&mid, "predicted_gap"), "0");
    assert!(value(&mid, "z_minus").starts_with("-0.573"));
}

#[test]
fn layer_at_the_minimum_speed_is_monotone() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ggwave(&["layer", "--D", "1", "--beta", "1", "--c", "2"], tmp.path());
    assert!(o.status.success());
    assert_eq!(value(&o, "monotone"), "true");
    assert_complete(tmp.path());
    let below = ggwave(&["layer", "--D", "1", "--beta", "1", "--c", "1.5"], tmp.path());
    assert_eq!(value(&below, "monotone"), "false");
}

#[test]
fn eigenvalue_vanishes_at_the_transcritical_point() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ggwave(
        &[
            "eigen", "--branch", "S2", "--w", "0.5", "--alpha", "2", "--beta", "1", "--c", "1",
        ],
        tmp.path(),
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains("lambda1=0 "), "{}", stdout(&o));
    assert_complete(tmp.path());
}

#[test]
fn usage_and_numerical_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| ggwave(args, tmp.path()).status.code().unwrap();
    assert_eq!(code(&["gap", "--alpha", "x", "--gamma", "1"]), 2);
    assert_eq!(code(&["gap", "--alpha", "-1", "--gamma", "1"]), 2);
    assert_eq!(code(&["slowwave", "--alpha", "2", "--c", "3"]), 2);
    assert_eq!(code(&["nonsense"]), 2);
    assert_eq!(
        code(&["fastwave", "--alpha", "3", "--beta", "4", "--gamma", "2", "--c", "1", "--h", "1e-9"]),
        2
    );
    assert_eq!(
        code(&[
            "layer",
            "--D",
            "1",
            "--beta",
            "1",
            "--c",
            "2",
            "--out",
            "/proc/no-such-dir"
        ]),
        1
    );
}

#[test]
fn fast_profile_files() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ggwave(
        &[
            "fastwave", "--alpha", "3", "--beta", "4", "--gamma", "2", "--c", "0.985",
        ],
        tmp.path(),
    );
    assert!(o.status.success());
    let res: f64 = value(&o, "residual").parse().unwrap();
    assert!(res <= 1e-6);
    assert_complete(tmp.path());
    let csv = std::fs::read_to_string(tmp.path().join("fast_wave.csv")).unwrap();
    assert!(csv.starts_with("z,u0,v0,w0,phi0\n"));
}

#[test]
fn simulated_fast_front() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ggwave(
        &[
            "simulate",
            "--alpha",
            "3",
            "--beta",
            "4",
            "--gamma",
            "2",
            "--epsilon",
            "4e-5",
            "--domain",
            "60",
            "--n",
            "600",
            "--t-end",
            "25",
            "--snapshots",
            "20",
        ],
        tmp.path(),
    );
    assert!(o.status.success());
    let m = manifest(tmp.path());
    let speed = m["measured"]["speed"].as_f64().unwrap();
    assert!((speed / 0.985 - 1.0).abs() < 0.05, "{speed}");
    assert_eq!(m["outputs"].as_array().unwrap().len(), 21);
    assert_complete(tmp.path());
}

#[test]
fn reduced_model_gap() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ggwave(
        &[
            "simulate",
            "--qss",
            "--alpha",
            "15",
            "--gamma",
            "0.5",
            "--domain",
            "12",
            "--n",
            "240",
            "--t-end",
            "50",
            "--gap-delta",
            "0.01",
            "--snapshots",
            "5",
        ],
        tmp.path(),
    );
    assert!(o.status.success());
    let m = manifest(tmp.path());
    let gap = m["measured"]["gap"].as_f64().unwrap();
    assert!((gap / 2.8495 - 1.0).abs() < 0.1, "{gap}");
    assert!(m["measured"]["speed"].is_null());
}

#[test]
fn empty_sweep_writes_only_the_header() {
    let tmp = tempfile::tempdir().unwrap();
    let file = write_sweep(
        tmp.path(),
        r#"{"command": "simulate", "grid": [{"param": "alpha", "values": []}]}"#,
    );
    let o = ggwave(&["sweep", &file], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    assert_eq!(csv, "index,alpha,speed,gap,predicted_gap,residual,error\n");
}

#[test]
fn sweep_rows_do_not_depend_on_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let file = write_sweep(
        tmp.path(),
        r#"{"command": "fastwave", "base": {"beta": 4, "gamma": 2, "h": 0.02},
            "grid": [{"param": "alpha", "values": [0.5, 3]}, {"param": "c", "values": [0.5, 0.985, 2, 4]}]}"#,
    );
    let run = |jobs: &str| {
        let dir = tmp.path().join(format!("jobs{jobs}"));
        let o = ggwave(
            &["sweep", &file, "--jobs", jobs, "--out", dir.to_str().unwrap()],
            tmp.path(),
        );
        assert!(o.status.success());
        (std::fs::read(dir.join("sweep.csv")).unwrap(), manifest(&dir))
    };
    let (one, m1) = run("1");
    let (three, m3) = run("3");
    assert_eq!(one, three);
    assert_eq!(String::from_utf8(one).unwrap().lines().count(), 9);
    assert_eq!(m1["measured"], m3["measured"]);
}

#[test]
fn failed_rows_are_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let file = write_sweep(
        tmp.path(),
        r#"{"command": "slowwave", "base": {"c": 3}, "grid": [{"param": "alpha", "values": [0.5, 2, 15]}]}"#,
    );
    let o = ggwave(&["sweep", &file], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let csv = std::fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].ends_with(','));
    assert!(rows[1].contains("regime boundary"));
    assert!(rows[2].starts_with("2,15,"));
    assert_eq!(manifest(tmp.path())["measured"]["failed_rows"], 1);
}

#[test]
fn malformed_sweep_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let file = write_sweep(
        tmp.path(),
        r#"{"command": "gap", "grid": [{"param": "bogus", "values": [1]}]}"#,
    );
    assert_eq!(ggwave(&["sweep", &file], tmp.path()).status.code(), Some(2));
    let file = write_sweep(tmp.path(), "not json");
    assert_eq!(ggwave(&["sweep", &file], tmp.path()).status.code(), Some(2));
}

#[test]
fn explicit_out_overrides_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let explicit = tmp.path().join("explicit");
    let o = ggwave(
        &[
            "layer",
            "--D",
            "0.5",
            "--beta",
            "2",
            "--c",
            "3",
            "--out",
            explicit.to_str().unwrap(),
        ],
        &tmp.path().join("env"),
    );
    assert!(o.status.success());
    assert!(explicit.join("manifest.json").exists());
    assert!(!tmp.path().join("env").exists());
}

#[test]
fn identical_runs_share_a_config_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["slowwave", "--alpha", "1.5", "--c", "2"];
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    ggwave(&[&args[..], &["--out", a.to_str().unwrap()]].concat(), tmp.path());
    ggwave(&[&args[..], &["--out", b.to_str().unwrap()]].concat(), tmp.path());
    assert_eq!(manifest(&a)["config_hash"], manifest(&b)["config_hash"]);
    assert_eq!(
        std::fs::read(a.join("slow_profile.csv")).unwrap(),
        std::fs::read(b.join("slow_profile.csv")).unwrap()
    );
}
