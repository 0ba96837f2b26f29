use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.toml"))
}

fn hcma(args: &[&str], out: &Path) -> i32 {
    let status = Command::new(env!("CARGO_BIN_EXE_hcma"))
        .args(args)
        .arg("--out")
        .arg(out)
        .status()
        .expect("binary runs");
    status.code().expect("exited normally")
}

fn with_scenario(cmd: &str, name: &str, extra: &[&str], out: &Path) -> i32 {
    let path = scenario(name);
    let mut args = vec![cmd, "--scenario", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    hcma(&args, out)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path).unwrap().lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn translation_solve_recovers_the_exact_family() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(with_scenario("solve", "translation", &[], dir.path()), 0);
    for f in ["discs.csv", "nodes.csv", "residual_history.csv", "diagnostics.json", "run.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let d = json(&dir.path().join("diagnostics.json"));
    assert_eq!(d["passed"], true);
    assert_eq!(d["nodes"], 9);
    let nodes = rows(&dir.path().join("nodes.csv"));
    // z = w + eps (tau + i) / 2 and xi = conj(w), eps = 0.05
    let eps = 0.05;
    let mut worst = 0.0f64;
    for r in rows(&dir.path().join("discs.csv")) {
        let (node, comp, k) = (r[0].parse::<usize>().unwrap(), r[1].as_str(), r[2].parse::<usize>().unwrap());
        let (wr, wi) = (num(&nodes[node][1]), num(&nodes[node][2]));
        let expect = match (comp, k) {
            ("z1", 0) => (wr, wi + eps / 2.0),
            ("z1", 1) => (eps / 2.0, 0.0),
            ("xi1", 0) => (wr, -wi),
            _ => (0.0, 0.0),
        };
        worst = worst.max((num(&r[3]) - expect.0).abs().max((num(&r[4]) - expect.1).abs()));
    }
    assert!(worst <= 1e-8, "{worst}");
}

#[test]
fn malformed_and_invalid_scenarios_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "schema_version = 1\nname = \"x\"\n[potential\n").unwrap();
    assert_eq!(hcma(&["solve", "--scenario", bad.to_str().unwrap()], dir.path()), 2);
    let text = std::fs::read_to_string(scenario("translation")).unwrap();
    std::fs::write(&bad, text.replace("eps = 0.05", "eps = 0.05\nunknown = 3")).unwrap();
    assert_eq!(hcma(&["solve", "--scenario", bad.to_str().unwrap()], dir.path()), 2);
    assert_eq!(hcma(&["solve", "--scenario", dir.path().join("missing.toml").to_str().unwrap()], dir.path()), 2);
    assert_eq!(hcma(&["solve"], dir.path()), 2);
    assert_eq!(hcma(&["frobnicate"], dir.path()), 2);
}

#[test]
fn large_translation_fails_the_solver() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(with_scenario("solve", "eps1", &[], dir.path()), 3);
}

#[test]
fn trivial_diagnose_has_zero_residuals() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(with_scenario("diagnose", "trivial", &[], dir.path()), 0);
    let d = json(&dir.path().join("diagnostics.json"));
    assert!(d["node_residuals"].as_array().unwrap().iter().all(|r| r.as_f64() == Some(0.0)));
    assert!(d["solve"]["residual_history"].as_array().unwrap().iter().all(|r| r.as_f64() == Some(0.0)));
    assert_eq!(d["newton_steps"], 0);
    let residuals = rows(&dir.path().join("node_residuals.csv"));
    assert_eq!(residuals.len(), 9);
    assert!(residuals.iter().all(|r| num(&r[2]) == 0.0));
}

#[test]
fn warnings_fail_only_under_strict() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(with_scenario("solve", "quartic", &[], dir.path()), 0);
    let d = json(&dir.path().join("diagnostics.json"));
    let small = d["checks"].as_array().unwrap().iter().find(|c| c["name"] == "smallness").unwrap().clone();
    assert_eq!(small["passed"], false);
    assert_eq!(small["warning"], true);
    assert_eq!(with_scenario("solve", "quartic", &["--strict"], dir.path()), 4);
}

#[test]
fn hilbert_of_cos_is_sin() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hcma(&["hilbert", "--probe", "cos", "--size", "64"], dir.path()), 0);
    let r = rows(&dir.path().join("hilbert.csv"));
    assert_eq!(r.len(), 64);
    for row in r {
        let t = num(&row[0]);
        assert!((num(&row[1]) - t.cos()).abs() < 1e-15);
        assert!((num(&row[2]) - t.sin()).abs() < 1e-10);
    }
}

#[test]
fn linear_basin() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hcma(&["linear", "--delta", "0.05"], dir.path()), 0);
    let d = json(&dir.path().join("linear.json"));
    assert!(d["report"]["contraction_ratio"].as_f64().unwrap() <= 0.5, "{d}");
    assert!(dir.path().join("linear_solution.csv").exists());
    assert_eq!(hcma(&["linear", "--delta", "0.9"], dir.path()), 3);
    assert_eq!(hcma(&["linear", "--delta", "0.9", "--shape", "mixed"], dir.path()), 3);
    assert!(json(&dir.path().join("linear.json"))["error"].as_str().unwrap().contains("failed to decrease"));
}

#[test]
fn counterexample_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let code = hcma(&["counterexample", "--alpha", "0.5", "--levels", "14"], dir.path());
    let summary = json(&dir.path().join("counterexample.json"));
    let growth = json(&dir.path().join("log_growth.json"));
    assert!(growth["fits"]["model"]["slope"].as_f64().unwrap() > 0.0);
    assert_eq!(growth["checks"]["positive_slope"], true);
    let failed = summary["failed_checks"].as_array().unwrap();
    assert_eq!(code, if failed.is_empty() { 0 } else { 4 });
    assert!(dir.path().join("offaxis_holder_constants.csv").exists());
}

#[test]
fn reconstruct_is_deterministic_across_threads() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(with_scenario("reconstruct", "translation", &["--threads", "1"], a.path()), 0);
    assert_eq!(with_scenario("reconstruct", "translation", &["--threads", "3"], b.path()), 0);
    for f in ["reconstruct.json", "discs.csv", "product.csv", "subsolution.csv"] {
        let (x, y) = (std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
        assert!(x == y, "{f} differs");
    }
    let r = json(&a.path().join("reconstruct.json"));
    assert_eq!(r["passed"], true);
    assert!(r["subsolution"]["psh"]["samples"].as_u64().unwrap() >= 500);
    assert!(json(&a.path().join("run.json"))["elapsed_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn seed_flag_overrides_the_scenario() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(with_scenario("solve", "trivial", &["--seed", "7"], dir.path()), 0);
    assert_eq!(json(&dir.path().join("diagnostics.json"))["seed"], 7);
    assert_eq!(with_scenario("solve", "trivial", &[], dir.path()), 0);
    assert_eq!(json(&dir.path().join("diagnostics.json"))["seed"], 1);
}
