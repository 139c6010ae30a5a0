use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn tiqca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tiqca"))
        .args(args)
        .output()
        .expect("binary runs")
}

// the Bell layouts below are evolved with Krylov, dense exponentials are slow in debug builds
fn evolve(args: &[&str]) -> Output {
    let mut all = vec!["evolve", "--dense-threshold", "0"];
    all.extend_from_slice(args);
    tiqca(&all)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const BELL_CIRCUIT: &str = r#"{"n_qubits": 2, "gates": [{"g": "G", "q": [0, 1]}]}"#;

fn bell_layout(dir: &Path) -> PathBuf {
    let circuit = write(dir, "c.json", BELL_CIRCUIT);
    let layout = dir.join("l.json");
    let o = tiqca(&[
        "assemble",
        "--circuit",
        circuit.to_str().unwrap(),
        "--padding",
        "1",
        "--left-margin",
        "5",
        "-o",
        layout.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    layout
}

#[test]
fn assemble_emits_versioned_layout() {
    let dir = TempDir::new().unwrap();
    let layout: Value = serde_json::from_str(&fs::read_to_string(bell_layout(dir.path())).unwrap()).unwrap();
    assert_eq!(layout["schema_version"], 1);
    assert_eq!(layout["program"], "SRGLS");
    assert_eq!(layout["padding"], 1);
    assert_eq!(layout["qubits"], "00");
    assert_eq!(layout["n_sites"], 5 + 2 + 6);
}

#[test]
fn evolve_at_zero_time_keeps_the_initial_configuration() {
    let dir = TempDir::new().unwrap();
    let layout = bell_layout(dir.path());
    let l = layout.to_str().unwrap();
    let summary = json(&evolve(&["--layout", l, "--t", "0"]));
    assert_eq!(summary["most_likely"], "eeeeeeeSRGLSL");
    assert_eq!(summary["most_likely_probability"], 1.0);
    assert_eq!(summary["success_probability"], 0.0);
    assert!(summary["readout"].is_null());

    let measured = json(&evolve(&["--layout", l, "--t", "0", "--measure", "--seed", "7"]));
    assert_eq!(measured["outcome"], "eeeeeeeSRGLSL");
    assert_eq!(measured["success"], false);
    assert_eq!(measured["probability"], 1.0);

    let o = evolve(&["--layout", l, "--t", "0", "--distribution"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "configuration,probability,success\neeeeeeeSRGLSL,1.00000000000000000e0,false\n");
}

#[test]
fn evolve_distribution_sums_to_one_and_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let layout = bell_layout(dir.path());
    let l = layout.to_str().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = evolve(&["--layout", l, "--t", "4", "--distribution", "-o", out.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let text = fs::read(&a).unwrap();
    assert_eq!(text, fs::read(&b).unwrap());
    let text = String::from_utf8(text).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("configuration,probability,success"));
    let total: f64 = lines.map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-10);
}

#[test]
fn measurement_is_deterministic_per_seed() {
    let dir = TempDir::new().unwrap();
    let layout = bell_layout(dir.path());
    let l = layout.to_str().unwrap();
    let run = |seed: &str| stdout(&evolve(&["--layout", l, "--t", "6", "--measure", "--seed", seed, "--repeat", "3"]));
    assert_eq!(run("11"), run("11"));
    let v: Value = serde_json::from_str(&run("11")).unwrap();
    assert!(v["rounds"].as_u64().unwrap() >= 1);
    if v["success"] == true {
        let readout = v["readout"].as_object().unwrap();
        let total: f64 = readout.values().map(|p| p.as_f64().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-10);
    } else {
        assert!(v["readout"].is_null());
    }
}

#[test]
fn gate_file_overrides_the_default_gate() {
    let dir = TempDir::new().unwrap();
    let layout = bell_layout(dir.path());
    let gates = write(
        dir.path(),
        "g.json",
        r#"{"schema_version": 1, "g_gate": [[1,0],[0,0],[0,0],[0,0],[0,0],[1,0],[0,0],[0,0],[0,0],[0,0],[1,0],[0,0],[0,0],[0,0],[0,0],[1,0]]}"#,
    );
    let l = layout.to_str().unwrap();
    let with = stdout(&evolve(&["--layout", l, "--t", "9", "--gate-file", gates.to_str().unwrap()]));
    let without = stdout(&evolve(&["--layout", l, "--t", "9"]));
    let with: Value = serde_json::from_str(&with).unwrap();
    let without: Value = serde_json::from_str(&without).unwrap();
    let ps = |v: &Value| v["success_probability"].as_f64().unwrap();
    assert!((ps(&with) - ps(&without)).abs() < 1e-12);
    assert!(ps(&with) > 0.0);
    assert_ne!(with["readout"], without["readout"]);
    // identity gate: the qubits stay in 00
    assert!((with["readout"]["00"].as_f64().unwrap() - 1.0).abs() < 1e-10);

    let bad = write(dir.path(), "bad.json", r#"{"g_gate": [[2,0],[0,0]]}"#);
    let o = evolve(&["--layout", l, "--t", "1", "--gate-file", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn p1_row_in_the_appendix_regime() {
    let o = tiqca(&["p1", "--N", "10", "--M", "1000", "--t", "50000"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("t,N,M,p1,p,departures,departures_one_sided,k,bound,ballistic_crossing,wraps")
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[..3], ["50000", "10", "1000"]);
    let p1: f64 = row[3].parse().unwrap();
    assert!(p1 <= 0.3);
    assert_eq!(row[7], "3");
    assert!(lines.next().is_none());
}

#[test]
fn p1_time_lists_and_csv_file() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("p1.csv");
    let o = tiqca(&["p1", "--N", "4", "--t", "0,1.5", "--t-mult", "10", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = fs::read_to_string(&csv).unwrap();
    let rows: Vec<Vec<String>> = text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][0], "0");
    assert_eq!(rows[0][3].parse::<f64>().unwrap(), 1.0);
    assert_eq!(rows[2][0], "40");
    assert_eq!(rows[2][2], "400");
}

#[test]
fn appendix_json() {
    let v = json(&tiqca(&["appendix", "--N", "20", "--eps", "0.001"]));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["N"], 20);
    assert_eq!(v["M"], 2000);
    assert_eq!(v["t"], 100000.0);
    assert!(v["term1_bound"].as_f64().unwrap() <= 0.002);
    assert!(v["term3"].as_f64().unwrap() < 0.05);
}

#[test]
fn slater_distribution_csv() {
    let o = tiqca(&["slater", "--sites", "0,1", "--M", "6", "--t", "0,0.7"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("t,configuration,probability\n0,0 1,1.00000000000000000e0\n"));
    let total: f64 = text
        .lines()
        .filter(|l| l.starts_with("0.7,"))
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-10);
    assert_eq!(text.lines().filter(|l| l.starts_with("0.7,")).count(), 15);

    let det = stdout(&o);
    let hop = stdout(&tiqca(&["slater", "--sites", "0,1", "--M", "6", "--t", "0,0.7", "--hopping"]));
    for (a, b) in det.lines().skip(1).zip(hop.lines().skip(1)) {
        let pa: f64 = a.rsplit(',').next().unwrap().parse().unwrap();
        let pb: f64 = b.rsplit(',').next().unwrap().parse().unwrap();
        assert!((pa - pb).abs() < 1e-10, "{a} vs {b}");
    }
    let open = tiqca(&["slater", "--sites", "0,1", "--M", "6", "--t", "1", "--boundary", "open"]);
    assert_eq!(open.status.code(), Some(1));
}

#[test]
fn qma_verify_zero_input() {
    let dir = TempDir::new().unwrap();
    let zero = write(
        dir.path(),
        "zero.json",
        r#"{"n": 2, "d": 2, "bonds": [[[0,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]]}"#,
    );
    for method in ["dense", "iterative"] {
        let v = json(&tiqca(&["qma", "verify", "--input", zero.to_str().unwrap(), "--method", method]));
        assert_eq!(v["verdict"], "zero-energy");
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["method"], method);
    }
}

#[test]
fn qma_verify_rejects_indefinite_input() {
    let dir = TempDir::new().unwrap();
    let input = write(
        dir.path(),
        "neg.json",
        r#"{"n": 2, "d": 2, "bonds": [[[-1,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]]}"#,
    );
    let o = tiqca(&["qma", "verify", "--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exit_codes_for_usage_and_validation_errors() {
    assert_eq!(tiqca(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(tiqca(&[]).status.code(), Some(1));
    assert_eq!(tiqca(&["p1", "--N", "3", "--bogus"]).status.code(), Some(1));
    assert_eq!(tiqca(&["p1", "--N", "0"]).status.code(), Some(1));
    assert_eq!(tiqca(&["p1", "--N", "3", "--t", "NaN"]).status.code(), Some(1));
    assert_eq!(evolve(&["--layout", "/nonexistent.json", "--t", "1"]).status.code(), Some(1));
    assert_eq!(tiqca(&["appendix", "--N", "5", "--eps", "-1"]).status.code(), Some(1));
    for sub in [&["assemble"][..], &["evolve"], &["p1"], &["appendix"], &["slater"], &["qma", "verify"]] {
        let mut args = sub.to_vec();
        args.push("--help");
        let o = tiqca(&args);
        assert_eq!(o.status.code(), Some(0), "{sub:?}");
        assert!(stdout(&o).contains("Usage"));
    }
}

#[test]
fn thread_count_variable() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_tiqca"))
            .args(["p1", "--N", "5", "--t", "1,2,3"])
            .env("TIQCA_THREADS", threads)
            .output()
            .unwrap()
    };
    assert_eq!(run("1").stdout, run("3").stdout);
    assert_eq!(run("zero").status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let layout = bell_layout(dir.path());
    // a tolerance below round-off cannot be met by the Krylov residual test
    let o = evolve(&["--layout", layout.to_str().unwrap(), "--t", "1", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}
