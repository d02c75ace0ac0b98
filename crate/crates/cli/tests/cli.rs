use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fairrecov"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("failed to spawn binary")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json_file(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn grid_file(dir: &TempDir, rows: usize, cols: usize) -> PathBuf {
    let g = dir.path().join(format!("grid{rows}x{cols}.txt"));
    ok(&[
        "graph", "gen", "--family", "grid", "--rows", &rows.to_string(), "--cols", &cols.to_string(), "--out",
        path_str(&g),
    ]);
    g
}

#[test]
fn version_names_prng() {
    let out = ok(&["--version"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains(env!("CARGO_PKG_VERSION")));
    assert!(text.contains("xoshiro256++"));
}

#[test]
fn square_grid_spectrum_has_zero_gap() {
    let dir = TempDir::new().unwrap();
    let g = grid_file(&dir, 3, 3);
    let out = ok(&["spectrum", "--graph", path_str(&g), "--closed-form-grid", "3", "3"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["delta"].as_f64().unwrap(), 0.0);
    assert!(v["closed_form"]["max_abs_diff"].as_f64().unwrap() < 1e-10);
    assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 9);
}

#[test]
fn noiseless_instance_is_recovered() {
    let dir = TempDir::new().unwrap();
    let g = grid_file(&dir, 2, 3);
    let inst = dir.path().join("inst.json");
    ok(&[
        "model", "gen", "--graph", path_str(&g), "--k", "1", "--p", "0", "--q", "0", "--seed", "5", "--out",
        path_str(&inst),
    ]);
    let before = fs::read(&inst).unwrap();
    let res = dir.path().join("solve.json");
    ok(&["solve", "--instance", path_str(&inst), "--out", path_str(&res)]);
    assert_eq!(fs::read(&inst).unwrap(), before, "input was modified");

    let v = json_file(&res);
    assert_eq!(v["recovered"], Value::Bool(true));
    assert_eq!(v["status"], "converged");
    assert_eq!(v["certificate"]["holds"], Value::Bool(true));
    let record = json_file(&inst);
    assert_eq!(v["labels"], record["y_bar"]);

    let manifest = json_file(&dir.path().join("solve.json.manifest.json"));
    assert_eq!(manifest["command"], "solve");
    assert_eq!(manifest["seed"], 5);
    assert!(manifest["timestamp"].as_str().unwrap().ends_with('Z'));
}

#[test]
fn solver_config_file_is_honored() {
    let dir = TempDir::new().unwrap();
    let g = grid_file(&dir, 2, 3);
    let inst = dir.path().join("inst.json");
    ok(&[
        "model", "gen", "--graph", path_str(&g), "--k", "0", "--p", "0.1", "--q", "0.1", "--seed", "9", "--out",
        path_str(&inst),
    ]);
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"max_iters": 3}"#).unwrap();
    let res = dir.path().join("solve.json");
    ok(&["solve", "--instance", path_str(&inst), "--config", path_str(&cfg), "--out", path_str(&res)]);
    let v = json_file(&res);
    assert_eq!(v["iterations"], 3);
    assert_eq!(v["status"], "iteration-cap");

    fs::write(&cfg, r#"{"primal_tol": -1}"#).unwrap();
    let bad = dir.path().join("bad.json");
    let out = run(&["solve", "--instance", path_str(&inst), "--config", path_str(&cfg), "--out", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!bad.exists());
}

#[test]
fn missing_flag_exits_2_without_output() {
    let dir = TempDir::new().unwrap();
    let g = grid_file(&dir, 2, 2);
    let out_file = dir.path().join("inst.json");
    // --seed is mandatory for sampling.
    let out = run(&["model", "gen", "--graph", path_str(&g), "--k", "0", "--p", "0.1", "--q", "0.1", "--out", path_str(&out_file)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_file.exists());

    let er = dir.path().join("er.txt");
    let out = run(&["graph", "gen", "--family", "er", "--n", "10", "--r", "0.5", "--out", path_str(&er)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!er.exists());

    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn invalid_values_exit_2_and_io_failures_exit_1() {
    let dir = TempDir::new().unwrap();
    let g = grid_file(&dir, 2, 2);
    let out_file = dir.path().join("inst.json");
    let out = run(&[
        "model", "gen", "--graph", path_str(&g), "--k", "0", "--p", "0.7", "--q", "0.1", "--seed", "1", "--out",
        path_str(&out_file),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_file.exists());

    let missing = dir.path().join("nope.txt");
    let out = run(&["spectrum", "--graph", path_str(&missing)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}

#[test]
fn bound_reports_components() {
    let dir = TempDir::new().unwrap();
    let g = grid_file(&dir, 2, 3);
    let inst = dir.path().join("inst.json");
    ok(&[
        "model", "gen", "--graph", path_str(&g), "--k", "1", "--p", "0.1", "--q", "0.1", "--seed", "3", "--out",
        path_str(&inst),
    ]);
    let with = ok(&["bound", "--graph", path_str(&g), "--instance", path_str(&inst), "--p", "0.1"]);
    let without = ok(&["bound", "--graph", path_str(&g), "--p", "0.1"]);
    let with: Value = serde_json::from_slice(&with.stdout).unwrap();
    let without: Value = serde_json::from_slice(&without.stdout).unwrap();
    assert_eq!(without["eps1"].as_f64().unwrap(), 0.0);
    assert!((with["r_const"].as_f64().unwrap() - 1.8).abs() < 1e-12);
    assert_eq!(with["phi_mode"], "exact");
    assert!(with["prob_lower_bound"].as_f64().unwrap() >= without["prob_lower_bound"].as_f64().unwrap());

    let other = grid_file(&dir, 3, 2);
    let out = run(&["bound", "--graph", path_str(&other), "--instance", path_str(&inst), "--p", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fig1_csv_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |out: &Path, threads: &str| {
        vec![
            "experiment".to_string(), "fig1".into(), "--n".into(), "10:30:10".into(), "--r".into(), "2logn/n".into(),
            "--trials".into(), "25".into(), "--seed".into(), "11".into(), "--threads".into(), threads.into(),
            "--out".into(), path_str(out).into(),
        ]
    };
    let run_args = |v: Vec<String>| ok(&v.iter().map(String::as_str).collect::<Vec<_>>());
    run_args(args(&a, "1"));
    run_args(args(&b, "2"));
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,r_spec,trials,prob_delta_positive,mean_delta");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("10,2logn/n,25,"));
    assert!(!text.contains('\r'));
    let manifest = json_file(&dir.path().join("a.csv.manifest.json"));
    assert_eq!(manifest["parameters"]["r"], "2logn/n");
}

#[test]
fn fig2_csv_layout() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("fig2.csv");
    ok(&[
        "experiment", "fig2", "--grid", "2x3", "--p", "0:0.1:0.05", "--k", "0,1", "--trials", "2", "--seed", "8",
        "--out", path_str(&out),
    ]);
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "p,k,trials,recovery_rate,certificate_rate");
    assert_eq!(lines.len(), 1 + 3 * 2);
    assert!(lines[1].starts_with("0.0,0,2,1.0,"));
    let manifest = json_file(&dir.path().join("fig2.csv.manifest.json"));
    assert_eq!(manifest["parameters"]["q_rule"], "q = p");

    let bad = dir.path().join("bad.csv");
    let res = run(&["experiment", "fig2", "--grid", "4by16", "--seed", "1", "--out", path_str(&bad)]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!bad.exists());
}
