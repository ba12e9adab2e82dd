//! Scenario files, reports and the command-line front end.

use std::path::Path;
use std::process::Command;

use coalition_nash::engine::Algorithm;
use coalition_nash::game::{case1, case2, Game};
use coalition_nash::harness::*;

const BIN: &str = env!("CARGO_BIN_EXE_coalition-nash");

fn same_game(a: &Game, b: &Game) {
    assert_eq!(a.holdings(), b.holdings());
    assert_eq!(a.resources(), b.resources());
    assert_eq!(a.kind(), b.kind());
    assert_eq!(a.topology().edges(), b.topology().edges());
    for (x, y) in a.objectives().iter().zip(b.objectives()) {
        assert_eq!(x.as_quadratic(), y.as_quadratic());
    }
}

#[test]
fn builtin_files_describe_the_example_games() {
    let s1 = Scenario::from_json(CASE1_JSON).unwrap();
    let s2 = Scenario::from_json(CASE2_JSON).unwrap();
    same_game(&s1.build_game().unwrap(), &case1());
    same_game(&s2.build_game().unwrap(), &case2());
    assert_eq!(s1.algorithm.mode, Algorithm::Special);
    assert_eq!(s2.algorithm.mode, Algorithm::General);
    for name in BUILTIN_NAMES {
        assert!(builtin_scenario(name).is_some());
    }
    assert!(builtin_scenario("case3").is_none());
}

#[test]
fn scenario_json_round_trip() {
    let s = Scenario::from_json(CASE2_JSON).unwrap();
    let back = Scenario::from_json(&s.to_json()).unwrap();
    assert_eq!(s, back);
}

#[test]
fn malformed_scenarios_are_rejected() {
    let mut v: serde_json::Value = serde_json::from_str(CASE1_JSON).unwrap();
    v["resources"]["coalition_totals"] = serde_json::json!([100.0, 150.0]);
    assert!(Scenario::from_json(&v.to_string()).is_err());

    let mut v: serde_json::Value = serde_json::from_str(CASE1_JSON).unwrap();
    v["schema"] = serde_json::json!(99);
    assert!(Scenario::from_json(&v.to_string()).is_err());

    let mut v: serde_json::Value = serde_json::from_str(CASE1_JSON).unwrap();
    v["algorithm"]["bogus"] = serde_json::json!(1);
    let err = Scenario::from_json(&v.to_string()).unwrap_err().to_string();
    assert!(err.contains("algorithm"), "{err}");

    let mut v: serde_json::Value = serde_json::from_str(CASE1_JSON).unwrap();
    v["topology"]["edges"] = serde_json::json!([[[1, 1], [1, 2]]]);
    assert!(Scenario::from_json(&v.to_string()).is_err());

    assert!(Scenario::from_json("{").is_err());
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn run_scenario_writes_consistent_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let s = Scenario::from_json(CASE1_JSON).unwrap();
    let out = run_scenario(&s, dir.path(), &Overrides { max_iters: Some(3000), step: None }).unwrap();
    let report = &out.report;
    assert_eq!(report.iterations, 3000);
    assert!(dir.path().join(REPORT_FILE).exists());

    let (header, rows) = read_csv(&dir.path().join(TRAJECTORY_FILE));
    assert_eq!(header[0], "k");
    assert_eq!(header[1], "x_11");
    assert_eq!(header.len(), 1 + 15 + 6);
    assert_eq!(rows.len(), 3000 / 10 + 1);
    let ks: Vec<usize> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(ks.windows(2).all(|w| w[0] < w[1]));
    let last: Vec<f64> = rows.last().unwrap()[1..16].iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(last, report.final_x);

    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join(REPORT_FILE)).unwrap()).unwrap();
    assert_eq!(parsed["iterations"], 3000);
    assert_eq!(parsed["algorithm"], "special");
    assert!(report.convergence_slope.unwrap() < 0.0);
    assert!(report.certificate.as_ref().is_some_and(|c| !c.step_within_bound));
}

#[test]
fn zero_iterations_leave_fit_empty() {
    let dir = tempfile::tempdir().unwrap();
    let s = Scenario::from_json(CASE2_JSON).unwrap();
    let out = run_scenario(&s, dir.path(), &Overrides { max_iters: Some(0), step: None }).unwrap();
    assert_eq!(out.report.iterations, 0);
    assert!(out.report.convergence_slope.is_none());
    assert_eq!(out.trajectory.records.len(), 1);
    assert_eq!(out.report.passed, Some(false));
}

#[test]
fn in_process_cli_prints_builtin() {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_cli(["coalition-nash", "builtin", "case2"], &mut out, &mut err);
    assert_eq!(code, EXIT_OK);
    assert_eq!(String::from_utf8(out).unwrap().trim(), CASE2_JSON.trim());
}

fn cli(args: &[&str], cwd: &Path) -> (i32, String, String) {
    let o = Command::new(BIN).args(args).current_dir(cwd).env("COALITION_NASH_LOG", "quiet").output().unwrap();
    (
        o.status.code().unwrap(),
        String::from_utf8_lossy(&o.stdout).into_owned(),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (code, text, _) = cli(&["builtin", "case1"], d);
    assert_eq!(code, 0);
    std::fs::write(d.join("case1.json"), &text).unwrap();

    let (code, text, _) = cli(&["run", "case1.json", "--iters", "20000"], d);
    assert_eq!(code, 0, "{text}");
    assert!(d.join("out/case1").join(TRAJECTORY_FILE).exists());
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["passed"], true);

    let (code, _, _) = cli(&["validate", "case1.json"], d);
    assert_eq!(code, 0);

    let mut broken: serde_json::Value = serde_json::from_str(CASE1_JSON).unwrap();
    broken["resources"]["coalition_totals"] = serde_json::json!([1.0]);
    std::fs::write(d.join("broken.json"), broken.to_string()).unwrap();
    let (code, _, err) = cli(&["validate", "broken.json"], d);
    assert_eq!(code, EXIT_FAILURE);
    assert!(err.starts_with("error:"));

    let (code, _, _) = cli(&["validate", "missing.json"], d);
    assert_eq!(code, EXIT_FAILURE);

    let (code, _, _) = cli(&["run", "case1.json", "--frobnicate"], d);
    assert_eq!(code, EXIT_USAGE);

    let (code, text, _) = cli(&["certify", "case1.json"], d);
    assert_eq!(code, 0);
    let cert: serde_json::Value = serde_json::from_str(&text).unwrap();
    let bound = cert["bound"].as_f64().unwrap();
    assert!(bound > 0.0 && bound < 1e-6);

    let (code, text, _) = cli(&["solve-ne", "case1.json"], d);
    assert_eq!(code, 0);
    let ne: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!((ne["x_star"][0].as_f64().unwrap() - 14.12).abs() < 0.01);

    let (_, text, _) = cli(&["builtin", "case2"], d);
    std::fs::write(d.join("case2.json"), text).unwrap();
    let (code, _, err) = cli(&["run", "case2.json", "--step", "50", "--out", "div"], d);
    assert_eq!(code, EXIT_NO_CONVERGENCE, "{err}");
}
