//! Scenario files, the task runner and run reports.

pub mod runner;
pub mod scenario;

pub use runner::{expand_suite, run, run_suites, EnvironmentStamp, RunReport, TaskEntry, REPORT_VERSION};
pub use scenario::{
    load_scenario, Command, Scenario, ScenarioError, ScenarioFile, Task, TaskArgs, SCHEMA_VERSION,
};
