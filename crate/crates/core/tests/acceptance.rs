//! The ten acceptance criteria, at full size. Prints one line per criterion.
//!
//! Runtime targets are reported next to each result. They are not part of
//! the verdict: wall time depends on the machine (the sample loops run on
//! the rayon pool, so a single-core host is the slowest case).

use std::time::Instant;

use serde_json::json;

use cokinetic::cli::{run, Scenario};
use cokinetic::suites::{run_suite, SuiteParams};
use cokinetic::VerificationReport;

struct Criterion {
    id: usize,
    title: &'static str,
    suites: &'static [&'static str],
    target_secs: f64,
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, title: "group algebra identities", suites: &["algebra"], target_secs: 60.0 },
    Criterion { id: 2, title: "conformal factors and Reeb pairings", suites: &["conformal"], target_secs: 60.0 },
    Criterion { id: 3, title: "energy along orbits", suites: &["energy"], target_secs: 5.0 },
    Criterion { id: 4, title: "length axioms and sin y anchor", suites: &["lengths"], target_secs: 30.0 },
    Criterion { id: 5, title: "reparameterization Lipschitz bound", suites: &["rl2"], target_secs: 120.0 },
    Criterion { id: 6, title: "boundary flattening constructions", suites: &["flatten"], target_secs: 60.0 },
    Criterion { id: 7, title: "symplectic lifts", suites: &["lift"], target_secs: 60.0 },
    Criterion { id: 8, title: "fixed points versus Gamma", suites: &["fixpoints"], target_secs: 90.0 },
    Criterion { id: 9, title: "winding and flux invariants", suites: &["winding"], target_secs: 90.0 },
    Criterion { id: 10, title: "infrastructure and determinism", suites: &["infrastructure"], target_secs: 30.0 },
];

/// A scenario touching several commands, run twice from a serialized copy.
fn determinism_report() -> VerificationReport {
    let v = json!({
        "schema": "cokinetic-scenario/1",
        "seed": 99,
        "model": { "n": 1, "z_topology": "circle" },
        "defaults": { "steps": 256 },
        "curves": [ { "name": "square", "kind": "polynomial", "params": [0.0, 0.0, 1.0] } ],
        "isotopies": [
            { "name": "f", "kind": "co-hamiltonian",
              "generator": [ { "k": [1, 1, 0], "a": [0.3, 0.2] }, { "k": [0, 1, 0], "b": 0.5 } ] },
            { "name": "g", "kind": "almost-co-hamiltonian",
              "generator": [ { "k": [1, 0, 0], "b": 0.4 } ],
              "reeb": [ { "k": [0], "a": 0.2 }, { "k": [1], "b": [0.0, 0.3] } ] }
        ],
        "tasks": [
            { "command": "length", "arguments": { "isotopy": "f" } },
            { "command": "identities", "arguments": { "isotopy": "f", "samples": 4 } },
            { "command": "conformal", "arguments": { "isotopy": "g", "samples": 4 } },
            { "command": "fixed-points", "arguments": { "isotopy": "f" } },
            { "command": "c0-distance", "arguments": { "a": "f", "b": "f" } },
            { "command": "reparam", "arguments": { "isotopy": "f", "curve": "square" } }
        ]
    });
    let mut r = VerificationReport::new("determinism");
    let s = match Scenario::from_value(v) {
        Ok(s) => s,
        Err(e) => {
            r.check_flag("scenario_loads", false).note(e.to_string());
            return r;
        }
    };
    let copy = Scenario::from_json(&s.to_json());
    r.check_flag("scenario_round_trip", copy.as_ref().is_ok_and(|c| *c == s));
    let first = run(&s, None);
    let second = run(copy.as_ref().unwrap_or(&s), None);
    r.check_flag("byte_identical_reports", first.deterministic_json() == second.deterministic_json())
        .check_flag("scenario_tasks_pass", first.pass);
    r
}

#[test]
fn acceptance() {
    let mut verdicts = Vec::new();
    let mut lines = Vec::new();
    for c in CRITERIA {
        let start = Instant::now();
        let mut report = VerificationReport::new(format!("criterion {}", c.id));
        for name in c.suites {
            match run_suite(name, &SuiteParams::full(name)) {
                Ok(r) => {
                    report.merge(&format!("{name}/"), r);
                }
                Err(e) => {
                    report.check_flag(format!("{name}/runs"), false).note(e.to_string());
                }
            }
        }
        if c.id == 10 {
            report.merge("scenario/", determinism_report());
        }
        let secs = start.elapsed().as_secs_f64();
        let timing = if secs <= c.target_secs {
            format!("{secs:.1}s (target {:.0}s)", c.target_secs)
        } else {
            format!("{secs:.1}s (target {:.0}s exceeded on {} thread(s))", c.target_secs, rayon::current_num_threads())
        };
        let verdict = if report.pass { "PASS" } else { "FAIL" };
        let mut line = format!("criterion {:>2} [{verdict}] {:<38} {timing}", c.id, c.title);
        for f in report.failures() {
            line.push_str(&format!("\n    failed: {} = {:e} (bound {:?})", f.name, f.value, f.bound));
        }
        for n in &report.notes {
            line.push_str(&format!("\n    note: {n}"));
        }
        println!("{line}");
        lines.push(line);
        verdicts.push(report.pass);
    }
    println!("{} of {} criteria pass", verdicts.iter().filter(|v| **v).count(), verdicts.len());
    assert!(verdicts.iter().all(|v| *v), "failing criteria:\n{}", lines.join("\n"));
}
