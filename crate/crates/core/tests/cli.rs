mod common;

use std::path::Path;
use std::process::{Command, Output};

use burnside_lab::lab::{GROWTH_CSV_HEADER, METRIC_CSV_HEADER};
use common::*;
use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_burnside-lab"))
        .args(args)
        .env_remove("BURNSIDE_LAB_THREADS")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_scenario(dir: &Path, body: &str) -> String {
    let path = dir.join("s.json");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const TINY: &str = r#"{
  "name": "tiny",
  "generators": [{"kind": "rotation", "name": "r", "axis": [0, 0, 1], "angle": 1.5707963267948966}],
  "max_radius": 4,
  "experiments": ["growth"]
}"#;

#[test]
fn run_writes_schema_valid_report_and_csv_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let scenario = scenario_path("cyclic4");
    let res = lab(&[
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        &out,
        "run",
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("cyclic4.json")).unwrap())
            .unwrap();
    let errors = validate(&load_schema(), &report);
    assert!(errors.is_empty(), "{errors:#?}");
    assert!(report.get("wall_clock_seconds").is_none());
    for (file, header) in [
        ("cyclic4-growth.csv", GROWTH_CSV_HEADER),
        ("cyclic4-derivs.csv", GROWTH_CSV_HEADER),
        ("cyclic4-pesin-0.csv", METRIC_CSV_HEADER),
    ] {
        let text = std::fs::read_to_string(dir.path().join(file)).unwrap();
        assert_eq!(text.lines().next(), Some(header), "{file}");
        let width = header.split(',').count();
        assert!(text.lines().skip(1).all(|l| l.split(',').count() == width));
    }
}

#[test]
fn single_experiment_blocks_match_their_schema_definitions() {
    let schema = load_schema();
    let scenario = scenario_path("so3-baseline");
    for exp in [
        "growth",
        "lyapunov",
        "pesin",
        "qc",
        "recur",
        "order",
        "conjfamily",
    ] {
        let res = lab(&[
            "--scenario",
            scenario.to_str().unwrap(),
            "--format",
            "json",
            exp,
        ]);
        assert_eq!(code(&res), 0, "{exp}: {}", stderr(&res));
        let block: Value = serde_json::from_slice(&res.stdout).unwrap();
        let sub =
            serde_json::json!({"$ref": format!("#/$defs/{exp}"), "$defs": schema["$defs"].clone()});
        let errors = validate(&sub, &block);
        assert!(errors.is_empty(), "{exp}: {errors:#?}");
    }
}

#[test]
fn growth_csv_goes_to_stdout() {
    let scenario = scenario_path("free-rotations");
    let res = lab(&[
        "--scenario",
        scenario.to_str().unwrap(),
        "--format",
        "csv",
        "growth",
        "--radius",
        "5",
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let text = String::from_utf8(res.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], GROWTH_CSV_HEADER);
    assert!(lines[6].starts_with("5,485,"), "{}", lines[6]);
}

#[test]
fn csv_for_a_json_only_experiment_is_a_usage_error() {
    let scenario = scenario_path("cyclic4");
    let res = lab(&[
        "--scenario",
        scenario.to_str().unwrap(),
        "--format",
        "csv",
        "order",
    ]);
    assert_eq!(code(&res), 2);
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (TINY.replace("\"max_radius\"", "\"colour\": 3, \"max_radius\""), "colour"),
        (TINY.replace("\"max_radius\"", "\"epsilon\": -1, \"max_radius\""), "epsilon must be positive"),
        (TINY.replace("{\"kind\"", "{\"kind\": \"twist\", \"name\": \"r\", \"axis\": [1,0,0], \"strength\": 1}, {\"kind\""), "duplicate generator name `r`"),
        ("{ \"name\": ".to_string(), "line"),
    ];
    for (body, needle) in cases {
        let path = write_scenario(dir.path(), &body);
        let res = lab(&["--scenario", &path, "run"]);
        assert_eq!(code(&res), 2, "{body}");
        assert!(stderr(&res).contains(needle), "{}", stderr(&res));
    }
    let res = lab(&["run"]);
    assert_eq!(code(&res), 2);
    let linked = scenario_path("linked-twists");
    let res = lab(&[
        "--scenario",
        linked.to_str().unwrap(),
        "lyapunov",
        "--word",
        "periodic:tz,ty",
    ]);
    assert_eq!(code(&res), 2, "{}", stderr(&res));
    let res = lab(&[
        "--scenario",
        linked.to_str().unwrap(),
        "lyapunov",
        "--word",
        "cyclic:tz",
    ]);
    assert_eq!(code(&res), 2);
}

#[test]
fn truncated_balls_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let body = TINY
        .replace("\"max_radius\": 4", "\"max_radius\": 4, \"element_cap\": 2")
        .replace("\"growth\"]", "\"growth\", \"recur\"]");
    let path = write_scenario(dir.path(), &body);
    let res = lab(&["--scenario", &path, "run"]);
    assert_eq!(code(&res), 3, "{}", stderr(&res));
    let report: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(report["truncated"], Value::Bool(true));
    assert!(report["errors"]["recur"]
        .as_str()
        .unwrap()
        .contains("truncated"));
}

#[test]
fn reports_ignore_thread_count_and_honour_seed_and_timing() {
    let scenario = scenario_path("so3-baseline");
    let s = scenario.to_str().unwrap();
    let one = lab(&["--scenario", s, "--threads", "1", "run"]);
    let env = Command::new(env!("CARGO_BIN_EXE_burnside-lab"))
        .args(["--scenario", s, "run"])
        .env("BURNSIDE_LAB_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(code(&one), 0);
    assert_eq!(code(&env), 0);
    assert_eq!(one.stdout, env.stdout);

    let reseeded = lab(&["--scenario", s, "--seed", "99", "lyapunov"]);
    let block: Value = serde_json::from_slice(&reseeded.stdout).unwrap();
    assert_eq!(block["word"], "random:99");

    let timed = lab(&["--scenario", s, "--timing", "order"]);
    assert_eq!(code(&timed), 0);
    let timed = lab(&["--scenario", s, "--timing", "run"]);
    let report: Value = serde_json::from_slice(&timed.stdout).unwrap();
    assert!(report["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn recur_flags_override_the_scenario() {
    let scenario = scenario_path("free-rotations");
    let res = lab(&[
        "--scenario",
        scenario.to_str().unwrap(),
        "recur",
        "--radius",
        "3",
        "--kmax",
        "8",
        "--triple",
        "1,0,0,0,1,0,0,0,1",
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let block: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(block["radius"], 3);
    assert_eq!(block["ball_size"], 53);
    let res = lab(&[
        "--scenario",
        scenario.to_str().unwrap(),
        "recur",
        "--triple",
        "1,0,0",
    ]);
    assert_eq!(code(&res), 2);
}
