//! End-to-end tests of the `parafix` binary and the command layer.
//!
//! The binary is exercised as a real subprocess — argument parsing, file
//! IO, and process exit codes included. Exit code contract: 0 success,
//! 1 error, 2 horizon exhausted without convergence, 3 schedule not
//! certified.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use parafix::cli::{cmd_run, EXIT_HORIZON, EXIT_OK};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_parafix"))
}

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

#[test]
fn run_converges_on_the_linear_scenario_with_exit_zero() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["run"])
        .arg(scenario_path("linear.json"))
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    for file in ["trace.csv", "metrics.csv", "summary.txt"] {
        assert!(out.path().join(file).is_file(), "{file} missing");
    }
    let metrics = fs::read_to_string(out.path().join("metrics.csv")).unwrap();
    let last = metrics.lines().last().unwrap();
    let fields: Vec<&str> = last.split(',').collect();
    let final_disagreement: f64 = fields[1].parse().unwrap();
    assert!(final_disagreement <= 1e-8);
}

#[test]
fn run_exits_two_on_the_counterexample_scenario() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["run"])
        .arg(scenario_path("counterexample.json"))
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn run_exits_one_on_a_malformed_file() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"agents\": [}").unwrap();
    let output = bin()
        .args(["run"])
        .arg(&bad)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line"), "diagnostics should name the position: {stderr}");
}

#[test]
fn run_exits_one_on_unknown_keys_with_the_field_named() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("unknown.json");
    let mut text = fs::read_to_string(scenario_path("linear.json")).unwrap();
    text = text.replacen("\"init\"", "\"mystery\": 3, \"init\"", 1);
    fs::write(&bad, text).unwrap();
    let output = bin()
        .args(["run"])
        .arg(&bad)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("mystery"), "diagnostics should name the key: {stderr}");
}

#[test]
fn verify_single_check_exits_zero_and_writes_report() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["verify", "--suite", "check_counterexample", "--seed", "42", "--out"])
        .arg(out.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report = fs::read_to_string(out.path().join("report.csv")).unwrap();
    assert!(report.starts_with("check,trials,violations,worst_margin\n"));
    assert!(report.contains("counterexample,"));
}

#[test]
fn verify_unknown_check_exits_one() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["verify", "--suite", "nosuchcheck", "--out"])
        .arg(out.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn certify_finds_the_periodic_window_and_rejects_the_rooted_graph() {
    let ok = bin()
        .args(["certify"])
        .arg(scenario_path("periodic.json"))
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert!(stdout.contains("length 3"), "expected the 3-window: {stdout}");

    let bad = bin()
        .args(["certify"])
        .arg(scenario_path("counterexample.json"))
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(3));
    let stdout = String::from_utf8_lossy(&bad.stdout);
    assert!(stdout.contains("failing window"), "expected the failing window: {stdout}");
}

#[test]
fn repeated_runs_write_byte_identical_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(cmd_run(&scenario_path("linear.json"), a.path()), EXIT_OK);
    assert_eq!(cmd_run(&scenario_path("linear.json"), b.path()), EXIT_OK);
    for file in ["trace.csv", "metrics.csv", "summary.txt"] {
        let fa = fs::read(a.path().join(file)).unwrap();
        let fb = fs::read(b.path().join(file)).unwrap();
        assert_eq!(fa, fb, "{file} differs between identical runs");
    }
}

#[test]
fn the_counterexample_scenario_matches_the_library_fixture() {
    // The committed file must stay an honest mirror of the fixture the
    // verification suite uses.
    use parafix::engine::run;
    use parafix::scenario::ScenarioFile;
    use parafix::verify::fixtures::{stall_scenario, StallVariant};

    let from_file = ScenarioFile::load(scenario_path("counterexample.json"))
        .unwrap()
        .to_scenario()
        .unwrap();
    let fixture = stall_scenario(StallVariant::Frozen).unwrap();
    assert_eq!(from_file.x0.flatten(), fixture.x0.flatten());
    assert_eq!(from_file.horizon, fixture.horizon);

    let ta = run(&from_file).unwrap();
    let tb = run(&fixture).unwrap();
    assert_eq!(ta.len(), tb.len());
    assert_eq!(
        ta.final_step().x.flatten(),
        tb.final_step().x.flatten(),
        "file and fixture trajectories diverged"
    );
}

#[test]
fn the_linear_scenario_matches_the_library_fixture() {
    use parafix::engine::run;
    use parafix::scenario::ScenarioFile;
    use parafix::verify::fixtures::linear_regression_scenario;

    let from_file =
        ScenarioFile::load(scenario_path("linear.json")).unwrap().to_scenario().unwrap();
    let (fixture, _) = linear_regression_scenario(parafix::DEFAULT_SEED).unwrap();
    assert_eq!(from_file.x0.flatten(), fixture.x0.flatten(), "starts must match exactly");

    let ta = run(&from_file).unwrap();
    let tb = run(&fixture).unwrap();
    assert_eq!(ta.len(), tb.len(), "step counts must match");
    assert_eq!(ta.final_step().x.flatten(), tb.final_step().x.flatten());
}

#[test]
fn bundled_checks_do_not_mask_the_horizon_exit() {
    // A scenario file may carry verify names; they run after the
    // iteration and their violations (none here) decide nothing about
    // the convergence exit code.
    let dir = tempfile::tempdir().unwrap();
    let mut text = fs::read_to_string(scenario_path("counterexample.json")).unwrap();
    text = text.replacen("\"norm\"", "\"verify\": [\"counterexample\"], \"norm\"", 1);
    let path = dir.path().join("with_checks.json");
    fs::write(&path, text).unwrap();
    assert_eq!(cmd_run(&path, dir.path()), EXIT_HORIZON);
}
