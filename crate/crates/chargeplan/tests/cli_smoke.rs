//! Exercises the installed binary end to end: verb wiring, exit codes,
//! and artifact writing, with no assumptions beyond a temp directory.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chargeplan"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "command {:?} failed\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn make_fixture(dir: &Path) -> String {
    let fix = dir.join("fix");
    run_ok(&["fixture", "--out", fix.to_str().unwrap(), "--seed", "42"]);
    fix.join("config.json").to_str().unwrap().to_string()
}

#[test]
fn fixture_validate_run_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config = make_fixture(dir.path());

    let out = run_ok(&["validate", "--config", &config]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0 fatal"), "unexpected report: {text}");

    let plan_dir = dir.path().join("out");
    let out = run_ok(&[
        "run",
        "--config",
        &config,
        "--out",
        plan_dir.to_str().unwrap(),
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("sites"), "run summary missing: {text}");
    for name in [
        "plan.geojson",
        "site_plans.csv",
        "selection.csv",
        "reachability.csv",
        "forecast.csv",
        "summary.json",
    ] {
        assert!(plan_dir.join(name).exists(), "missing {name}");
    }
    // Debug tables only appear when asked for.
    assert!(!plan_dir.join("demand.csv").exists());

    let debug_dir = dir.path().join("out_debug");
    run_ok(&[
        "run",
        "--config",
        &config,
        "--out",
        debug_dir.to_str().unwrap(),
        "--debug",
    ]);
    for name in ["demand.csv", "centrality.csv", "candidates.csv", "parents.csv"] {
        assert!(debug_dir.join(name).exists(), "missing debug table {name}");
    }
}

#[test]
fn validate_flags_unknown_poi_class_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let config = make_fixture(dir.path());
    let pois = dir.path().join("fix/pois.csv");
    let text = fs::read_to_string(&pois).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let fields: Vec<&str> = lines[2].split(',').collect();
    lines[2] = format!("{},{},airport,{}", fields[0], fields[1], fields[3]);
    fs::write(&pois, lines.join("\n") + "\n").unwrap();

    let out = bin().args(["validate", "--config", &config]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("pois.csv:3"), "should cite file and line: {text}");
    assert!(text.contains("airport"), "should name the class: {text}");
}

#[test]
fn missing_input_exits_with_io_code() {
    let dir = tempfile::tempdir().unwrap();
    let config = make_fixture(dir.path());
    let out = bin()
        .args([
            "run",
            "--config",
            &config,
            "--out",
            dir.path().join("out").to_str().unwrap(),
            "--set",
            "inputs.cells=nowhere.csv",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn unreachable_coverage_exits_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let config = make_fixture(dir.path());
    let out = bin()
        .args([
            "run",
            "--config",
            &config,
            "--out",
            dir.path().join("out").to_str().unwrap(),
            "--set",
            "mclp.alpha=0.999",
            "--set",
            "mclp.radius_m=900",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("coverage"), "should explain the failure: {err}");
}

#[test]
fn queue_verb_prints_station_plan() {
    let out = run_ok(&["queue", "--lambda", "6", "--outage", "0.05"]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["ports"], 4);
    assert_eq!(doc["charger_type"], "dcfc");
    assert!(doc["rho_eff"].as_f64().unwrap() <= 0.9);

    // A rate no allowed port count can serve is an infeasibility, not a plan.
    let out = bin()
        .args(["queue", "--lambda", "500", "--set", "queueing.max_ports=4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn mclp_and_report_verbs_run_standalone() {
    let dir = tempfile::tempdir().unwrap();
    let config = make_fixture(dir.path());

    let out = run_ok(&["mclp", "--config", &config]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("step,site_id,zone_id"), "selection header: {text}");
    assert!(text.contains("covered "), "coverage summary: {text}");

    let plan_dir = dir.path().join("out");
    run_ok(&["run", "--config", &config, "--out", plan_dir.to_str().unwrap()]);
    let out = run_ok(&[
        "report",
        "--config",
        &config,
        "--out",
        plan_dir.to_str().unwrap(),
    ]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["coverage"].as_array().unwrap().len() >= 2);
    assert!(doc["equity"]["gap_m"].is_number());
    assert!(plan_dir.join("report.json").exists());
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = make_fixture(dir.path());
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    run_ok(&["run", "--config", &config, "--out", out_a.to_str().unwrap()]);
    run_ok(&[
        "run",
        "--config",
        &config,
        "--out",
        out_b.to_str().unwrap(),
        "--seed",
        "7",
    ]);
    let a = fs::read_to_string(out_a.join("summary.json")).unwrap();
    let b = fs::read_to_string(out_b.join("summary.json")).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&b).unwrap();
    assert_eq!(doc["seed"], 7);
    assert_ne!(a, b, "seed override should be visible in the summary");
}
