//! Scenario loading, the runner and the command-line contract.

use std::path::PathBuf;
use std::process::Command;

use serde_json::{json, Value};

use cokinetic::cli::{load_scenario, run, Scenario, ScenarioError};

fn minimal() -> Value {
    json!({
        "schema": "cokinetic-scenario/1",
        "seed": 1,
        "model": { "n": 1, "z_topology": "circle" },
        "isotopies": [ { "name": "id", "kind": "co-hamiltonian", "steps": 8 } ],
        "tasks": [ { "command": "length", "arguments": { "isotopy": "id", "expect": 0.0 } } ]
    })
}

fn sin_y() -> Value {
    json!({
        "schema": "cokinetic-scenario/1",
        "seed": 3,
        "model": { "n": 1, "z_topology": "circle" },
        "isotopies": [
            { "name": "f", "kind": "co-hamiltonian", "generator": [ { "k": [0, 1, 0], "b": 1.0 } ] }
        ],
        "tasks": [
            { "name": "l1", "command": "length", "arguments": { "isotopy": "f", "expect": 2.0 } },
            { "name": "wrong", "command": "length", "arguments": { "isotopy": "f", "flavor": "Linf", "expect": 3.0 } }
        ]
    })
}

fn write(dir: &tempfile::TempDir, name: &str, v: &Value) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn repo_scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

#[test]
fn minimal_scenario_has_one_task() {
    let s = Scenario::from_value(minimal()).unwrap();
    assert_eq!(s.tasks.len(), 1);
    let r = run(&s, None);
    assert!(r.pass, "{}", r.summary());
}

#[test]
fn undeclared_isotopy_is_a_reference_error() {
    let mut v = minimal();
    v["tasks"][0]["arguments"]["isotopy"] = json!("ghost");
    match Scenario::from_value(v) {
        Err(ScenarioError::Reference { name, pointer, .. }) => {
            assert_eq!(name, "ghost");
            assert_eq!(pointer, "/tasks/0/arguments/isotopy");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn z_frequency_in_co_hamiltonian_generator_is_rejected() {
    let mut v = minimal();
    v["isotopies"][0]["generator"] = json!([ { "k": [0, 0, 1], "a": 0.5 } ]);
    match Scenario::from_value(v) {
        Err(ScenarioError::Schema { pointer, message }) => {
            assert_eq!(pointer, "/isotopies/0/generator");
            assert!(message.contains("z-dependence forbidden for co-Hamiltonian kind"), "{message}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn schema_errors_carry_json_pointers() {
    let mut v = minimal();
    v["isotopies"][0]["steps"] = json!("many");
    match Scenario::from_value(v) {
        Err(ScenarioError::Schema { pointer, .. }) => assert_eq!(pointer, "/isotopies/0/steps"),
        other => panic!("{other:?}"),
    }
    let mut v = minimal();
    v["tasks"][0]["arguments"]["flavour"] = json!("Linf");
    match Scenario::from_value(v) {
        Err(ScenarioError::Schema { pointer, .. }) => assert!(pointer.starts_with("/tasks/0/arguments"), "{pointer}"),
        other => panic!("{other:?}"),
    }
    let mut v = minimal();
    v["schema"] = json!("cokinetic-scenario/0");
    assert!(matches!(Scenario::from_value(v), Err(ScenarioError::Schema { pointer, .. }) if pointer == "/schema"));
    let mut v = minimal();
    v["tasks"][0]["tolerances"] = json!({ "tol_quad": -1.0 });
    assert!(matches!(Scenario::from_value(v), Err(ScenarioError::Schema { pointer, .. }) if pointer == "/tasks/0/tolerances"));
}

#[test]
fn duplicate_names_are_rejected() {
    let mut v = minimal();
    v["curves"] = json!([ { "name": "id", "kind": "identity" } ]);
    assert!(matches!(Scenario::from_value(v), Err(ScenarioError::Schema { .. })));
}

#[test]
fn malformed_json_is_a_parse_error() {
    assert!(matches!(Scenario::from_json("{\"schema\": "), Err(ScenarioError::Parse(_))));
}

#[test]
fn empty_task_list_passes() {
    let mut v = minimal();
    v["tasks"] = json!([]);
    let r = run(&Scenario::from_value(v).unwrap(), None);
    assert!(r.pass && r.tasks.is_empty());
}

#[test]
fn sin_y_length_is_two_and_failures_are_isolated() {
    let s = Scenario::from_value(sin_y()).unwrap();
    let r = run(&s, None);
    assert!(!r.pass);
    assert!(r.tasks[0].pass);
    let l = r.tasks[0].length.as_ref().unwrap();
    assert!(l.lower - 1e-6 <= 2.0 && 2.0 <= l.upper + 1e-6);
    assert!(!r.tasks[1].pass && r.tasks[1].error.is_none());
    let only = run(&s, Some("l1"));
    assert!(only.pass && only.tasks.len() == 1);
}

#[test]
fn task_errors_do_not_abort_siblings() {
    let mut v = sin_y();
    v["tasks"] = json!([
        { "name": "bad", "command": "fixed-points", "arguments": { "isotopy": "f", "grid": 16 } },
        { "name": "good", "command": "length", "arguments": { "isotopy": "f", "expect": 2.0 } }
    ]);
    v["model"]["z_topology"] = json!("line");
    let r = run(&Scenario::from_value(v).unwrap(), None);
    assert!(r.tasks[0].error.is_some());
    assert!(r.tasks[1].pass);
    assert!(!r.pass);
}

#[test]
fn reports_are_deterministic_and_scenarios_round_trip() {
    let s = load_scenario(repo_scenario("sin_y_length.json")).unwrap();
    let back = Scenario::from_json(&s.to_json()).unwrap();
    assert_eq!(s, back);
    let (a, b) = (run(&s, None), run(&back, None));
    assert_eq!(a.deterministic_json(), b.deterministic_json());
    assert_eq!(a.to_json(), b.to_json());
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_cokinetic");
    let dir = tempfile::tempdir().unwrap();
    let good = write(&dir, "good.json", &minimal());
    let failing = write(&dir, "failing.json", &sin_y());
    let mut broken = minimal();
    broken["tasks"][0]["arguments"]["isotopy"] = json!("ghost");
    let broken = write(&dir, "broken.json", &broken);

    let code = |args: &[&std::ffi::OsStr]| Command::new(exe).args(args).output().unwrap().status.code();
    let out = dir.path().join("report.json");
    let csv = dir.path().join("csv");
    assert_eq!(
        code(&["run".as_ref(), good.as_os_str(), "--out".as_ref(), out.as_os_str(), "--csv".as_ref(), csv.as_os_str()]),
        Some(0)
    );
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["pass"], json!(true));
    assert!(csv.join("tasks.csv").exists() && csv.join("00_length_nodes.csv").exists());

    assert_eq!(code(&["run".as_ref(), failing.as_os_str(), "--out".as_ref(), out.as_os_str()]), Some(1));
    assert_eq!(code(&["run".as_ref(), broken.as_os_str()]), Some(2));
    assert_eq!(code(&["validate".as_ref(), good.as_os_str()]), Some(0));
    assert_eq!(code(&["validate".as_ref(), broken.as_os_str()]), Some(2));
    assert_eq!(code(&["run".as_ref(), good.as_os_str(), "--only".as_ref(), "nothing".as_ref()]), Some(2));
    assert_eq!(code(&["suite".as_ref(), "unknown".as_ref()]), Some(2));
}

#[test]
fn binary_output_is_byte_identical_across_runs() {
    let exe = env!("CARGO_BIN_EXE_cokinetic");
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "s.json", &sin_y());
    let once = || {
        Command::new(exe)
            .env("COKINETIC_THREADS", "1")
            .args(["run".as_ref(), p.as_os_str()])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(once(), once());
}

#[test]
fn shipped_scenarios_validate() {
    for name in ["sin_y_length.json", "tour.json"] {
        load_scenario(repo_scenario(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}
