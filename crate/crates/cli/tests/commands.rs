use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use coreg_core::preset;
use tempfile::TempDir;

fn coreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coreg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_preset(dir: &Path, name: &str) -> PathBuf {
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, preset(name).unwrap().to_json()).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn check_presets_pass() {
    let dir = TempDir::new().unwrap();
    for name in ["example1", "example2", "example3"] {
        let path = write_preset(dir.path(), name);
        let o = coreg(&["check", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
        assert!(!stdout(&o).contains("FAIL"));
    }
}

#[test]
fn check_rejects_self_loop_with_exit_2() {
    let dir = TempDir::new().unwrap();
    let mut doc: serde_json::Value =
        serde_json::from_str(&preset("example1").unwrap().to_json()).unwrap();
    doc["graphs"][0][0][0] = serde_json::json!(1.0);
    let path = dir.path().join("broken.json");
    fs::write(&path, doc.to_string()).unwrap();
    assert_eq!(coreg(&["check", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn missing_file_and_bad_usage() {
    assert_eq!(coreg(&["check", "/nonexistent/scenario.json"]).status.code(), Some(2));
    assert_eq!(coreg(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(coreg(&["preset", "example9"]).status.code(), Some(2));
}

#[test]
fn failed_assumption_exits_1() {
    let dir = TempDir::new().unwrap();
    let mut s = preset("example1").unwrap();
    s.agents[1].d_s.fill(0.0);
    let path = dir.path().join("zero.json");
    fs::write(&path, s.to_json()).unwrap();
    let o = coreg(&["check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL right_invertible [2]"));
}

#[test]
fn preset_command_round_trips() {
    let o = coreg(&["preset", "example3"]);
    assert_eq!(o.status.code(), Some(0));
    let s = coreg_core::load_scenario(&stdout(&o)).unwrap();
    assert_eq!(s, preset("example3").unwrap());
}

#[test]
fn synthesize_then_reuse_gains() {
    let dir = TempDir::new().unwrap();
    let scenario = write_preset(dir.path(), "example2");
    let gains = dir.path().join("gains.json");
    let o = coreg(&["synthesize", scenario.to_str().unwrap(), "-o", gains.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&gains).unwrap()).unwrap();
    assert_eq!(doc["mode"], "CASE1");
    assert_eq!(doc["agents"][1]["K_a"], serde_json::json!([[-3.0], [-2.0]]));
    // CASE modes list the ω block (empty here, q = 0) before the x0 block
    assert_eq!(doc["agents"][2]["Gamma"][0], serde_json::json!([[]]));
    let g = &doc["agents"][2]["Gamma"][1][0];
    assert!((g[0].as_f64().unwrap() - 1.0).abs() < 1e-8 && (g[1].as_f64().unwrap() - 2.0).abs() < 1e-8);

    let o = coreg(&[
        "certify",
        scenario.to_str().unwrap(),
        "--gains",
        gains.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("kappa_achieved  9"));
}

#[test]
fn certify_warns_but_succeeds() {
    let dir = TempDir::new().unwrap();
    let path = write_preset(dir.path(), "example1");
    let o = coreg(&["certify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("WARN kappa_achieved = 9 < kappa*")), "{text}");
    for key in ["kappa*", "eps*", "lambda_c", "lambda_d", "a   "] {
        assert!(text.contains(key), "{key} missing");
    }
}

#[test]
fn flags_override_the_scenario() {
    let dir = TempDir::new().unwrap();
    let path = write_preset(dir.path(), "example1");
    let report = dir.path().join("cert.json");
    let o = coreg(&[
        "certify",
        path.to_str().unwrap(),
        "--epsilon",
        "0.1",
        "--alpha",
        "0.25",
        "-o",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["epsilon"], 0.1);
    assert_eq!(doc["alpha"], 0.25);
    assert_eq!(doc["kappa_achieved"], 9.0);

    let bad = coreg(&["certify", path.to_str().unwrap(), "--mode", "sideways"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn simulate_example1_converges() {
    let dir = TempDir::new().unwrap();
    let path = write_preset(dir.path(), "example1");
    let csv = dir.path().join("trace.csv");
    let plot = dir.path().join("trace.gp");
    let o = coreg(&[
        "simulate",
        path.to_str().unwrap(),
        "--tol",
        "1e-2",
        "--horizon",
        "200",
        "-o",
        csv.to_str().unwrap(),
        "--gnuplot",
        plot.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,sigma,e1_1,e2_1,e3_1,obs_err_1,obs_err_2,obs_err_3"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert!(rows.iter().all(|r| r.len() == 8));
    assert_eq!(rows.last().unwrap()[0], 200.0);
    let at = rows.iter().find(|r| (r[0] - 19.99).abs() < 1e-9).unwrap();
    assert_eq!(at[1], 4.0);
    assert!(fs::read_to_string(&plot).unwrap().contains("trace.csv"));
}

#[test]
fn simulate_fails_tolerance_on_short_horizon() {
    let dir = TempDir::new().unwrap();
    let path = write_preset(dir.path(), "example1");
    let o = coreg(&["simulate", path.to_str().unwrap(), "--horizon", "1", "--tol", "1e-6"]);
    assert_eq!(o.status.code(), Some(1));
    // CSV goes to stdout when no -o is given
    assert!(stdout(&o).starts_with("t,sigma,"));
}

#[test]
fn simulate_rejects_misaligned_step() {
    let dir = TempDir::new().unwrap();
    let path = write_preset(dir.path(), "example1");
    let o = coreg(&["simulate", path.to_str().unwrap(), "--h", "0.0007", "--horizon", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}
