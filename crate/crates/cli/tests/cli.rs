use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_coherence-lab"));
    cmd.env_remove("COHERENCE_LAB_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn put(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn measure_maximally_coherent_qubit() {
    let dir = TempDir::new().unwrap();
    let s = put(&dir, "s.json", r#"{"amplitudes": [0.7071067811865476, [0.0, 0.7071067811865476]]}"#);
    let v = stdout_json(&run(&["measure", "-i", &s]));
    assert_eq!(v["dim"], 2);
    for key in ["l1", "g", "g_closed_form"] {
        assert!((v[key].as_f64().unwrap() - 1.0).abs() < 1e-12, "{key}");
    }

    let out = run(&["measure", "-i", &s, "--which", "l1", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "measure,value");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("l1,"));
}

#[test]
fn measure_incoherent_qutrit_from_rho() {
    let dir = TempDir::new().unwrap();
    let s = put(&dir, "s.json", r#"{"rho": [[0.5, 0, 0], [0, 0.3, 0], [0, 0, 0.2]]}"#);
    let v = stdout_json(&run(&["measure", "-i", &s]));
    assert_eq!(v["g"].as_f64(), Some(0.0));
    assert_eq!(v["l1"].as_f64(), Some(0.0));
    assert!(v.get("g_closed_form").is_none());
}

#[test]
fn random_is_reproducible_and_reads_seed_from_env() {
    let a = run(&["random", "state", "--dim", "4", "--seed", "11"]);
    let b = run(&["random", "state", "--dim", "4", "--seed", "11"]);
    let c = bin()
        .args(["random", "state", "--dim", "4"])
        .env("COHERENCE_LAB_SEED", "11")
        .output()
        .unwrap();
    let d = run(&["random", "state", "--dim", "4", "--seed", "12"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    assert_ne!(a.stdout, d.stdout);

    let v = stdout_json(&a);
    let norm: f64 = v["amplitudes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|z| {
            let (re, im) = (z[0].as_f64().unwrap(), z[1].as_f64().unwrap());
            re * re + im * im
        })
        .sum();
    assert!((norm - 1.0).abs() < 1e-12);
}

#[test]
fn generated_fsio_classifies_as_fsio() {
    let dir = TempDir::new().unwrap();
    let k = dir.path().join("k.json");
    let out = run(&["random", "fsio", "--dim", "3", "--n-kraus", "3", "--seed", "4", "-o", path_str(&k)]);
    assert!(out.status.success());
    let v = stdout_json(&run(&["classify", "-k", path_str(&k)]));
    assert_eq!(v["flags"]["fsio"], true);
    assert_eq!(v["flags"]["sio"], true);
    assert!(v["certificate"]["pi"].is_array());
}

#[test]
fn classify_distinguishes_diagonal_and_swap() {
    let dir = TempDir::new().unwrap();
    let diag = put(
        &dir,
        "diag.json",
        r#"{"kraus": [[[0.6, 0], [0, 0.8]], [[0.8, 0], [0, 0.6]]]}"#,
    );
    let swap = put(&dir, "swap.json", r#"{"kraus": [[[0, 1], [1, 0]]]}"#);
    let v = stdout_json(&run(&["classify", "-k", &diag]));
    assert_eq!(v["flags"]["gio"], true);
    assert_eq!(v["most_specific"], "GIO");
    let v = stdout_json(&run(&["classify", "-k", &swap]));
    assert_eq!(v["flags"]["gio"], false);
    assert_eq!(v["flags"]["sio"], true);
}

#[test]
fn classify_rejects_non_trace_preserving_set() {
    let dir = TempDir::new().unwrap();
    let k = put(&dir, "k.json", r#"{"kraus": [[[0.5, 0], [0, 0.5]]]}"#);
    let out = run(&["classify", "-k", &k]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn apply_swap_exchanges_populations() {
    let dir = TempDir::new().unwrap();
    let s = put(&dir, "s.json", r#"{"amplitudes": [0.6, 0.8]}"#);
    let k = put(&dir, "k.json", r#"{"kraus": [[[0, 1], [1, 0]]]}"#);
    let v = stdout_json(&run(&["apply", "-i", &s, "-k", &k]));
    let rho = &v["rho"];
    let entry = |i: usize, j: usize| rho[i][j][0].as_f64().unwrap();
    assert!((entry(0, 0) - 0.64).abs() < 1e-12);
    assert!((entry(1, 1) - 0.36).abs() < 1e-12);
    assert!((entry(0, 1) - 0.48).abs() < 1e-12);
}

#[test]
fn qubit_roof_equals_l1() {
    let dir = TempDir::new().unwrap();
    let s = put(&dir, "s.json", r#"{"rho": [[0.6, [0.1, 0.2]], [[0.1, -0.2], 0.4]]}"#);
    let v = stdout_json(&run(&["roof", "-i", &s, "--restarts", "4"]));
    let l1 = 2.0 * (0.1f64.powi(2) + 0.2f64.powi(2)).sqrt();
    assert!((v["value"].as_f64().unwrap() - l1).abs() < 1e-6);
    assert_eq!(v["converged"], true);
    let total: f64 = v["ensemble"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["p"].as_f64().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn verify_writes_records_and_summary() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("rec.csv");
    let out = run(&[
        "verify", "--dims", "2,3", "--trials", "4", "--seed", "9", "--probe-fio", "-o",
        path_str(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let records = fs::read_to_string(&csv).unwrap();
    let mut lines = records.lines();
    assert_eq!(lines.next(), Some("theorem_id,d,seed,lhs,rhs,deviation,status"));
    assert!(lines.all(|l| l.ends_with(",pass")));
    assert!(dir.path().join("rec.probe.csv").exists());

    let summary: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("rec.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["suite_failures"], 0);
    assert_eq!(summary["master_seed"], 9);
    assert_eq!(summary["suite"]["T1"]["pass"], 8);
    assert!(summary["counterexample_probe"].is_object());
}

#[test]
fn verify_is_deterministic_for_a_seed() {
    let a = run(&["verify", "--dims", "3", "--trials", "6", "--seed", "3", "--format", "csv"]);
    let b = run(&["verify", "--dims", "3", "--trials", "6", "--seed", "3", "--format", "csv"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_reads_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = put(&dir, "cfg.json", r#"{"dims": [2], "trials": 3, "master_seed": 5}"#);
    let v = stdout_json(&run(&["verify", "--config", &cfg]));
    assert_eq!(v["master_seed"], 5);
    assert_eq!(v["suite"]["T3"]["pass"], 3);

    let bad = put(&dir, "bad.json", r#"{"dims": [2], "tirals": 3}"#);
    assert_eq!(run(&["verify", "--config", &bad]).status.code(), Some(2));
    let bad_dim = put(&dir, "dim.json", r#"{"dims": [1]}"#);
    assert_eq!(run(&["verify", "--config", &bad_dim]).status.code(), Some(2));
}

#[test]
fn errors_map_to_exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["measure"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let missing = dir.path().join("missing.json");
    let out = run(&["measure", "-i", path_str(&missing)]);
    assert_eq!(out.status.code(), Some(2));

    let s = put(&dir, "s.json", r#"{"amplitudes": [1.0, 0.0], "rho": [[1, 0], [0, 0]]}"#);
    let out = run(&["measure", "-i", &s]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exactly one"));
}
