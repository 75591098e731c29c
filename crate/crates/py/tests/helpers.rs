//! The plain-Rust helpers behind the Python functions.

use cokinetic_py::{parse_flavor, parse_kind, run_scenario_json};

const SCENARIO: &str = r#"{
  "schema": "cokinetic-scenario/1",
  "seed": 5,
  "model": { "n": 1, "z_topology": "circle" },
  "isotopies": [ { "name": "f", "kind": "co-hamiltonian", "generator": [ { "k": [0, 1, 0], "b": 1.0 } ] } ],
  "tasks": [ { "command": "length", "arguments": { "isotopy": "f", "expect": 2.0 } } ]
}"#;

#[test]
fn scenario_runs_through_the_helper() {
    let (pass, json) = run_scenario_json(SCENARIO, None).unwrap();
    assert!(pass);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["tasks"][0]["command"], "length");
    assert!(run_scenario_json(SCENARIO, Some("winding")).is_err());
    assert!(run_scenario_json("{", None).unwrap_err().starts_with("parse error"));
}

#[test]
fn names_parse() {
    assert!(parse_kind("almost-co-hamiltonian").is_ok());
    assert!(parse_kind("hamiltonian").is_err());
    assert!(parse_flavor("Linf").is_ok() && parse_flavor("L2").is_err());
}
