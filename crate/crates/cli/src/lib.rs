//! Scenario-driven battery runner: loads TOML scenario files, evaluates the
//! requested estimators and checks, and writes CSV or markdown reports.

pub mod report;
pub mod run;
pub mod scenario;

pub use report::{emit_report, render, render_trace, Format};
pub use run::{run_battery, run_battery_with, Report, Row, RunOptions, Summary};
pub use scenario::{load_scenarios, parse_scenarios, to_toml, LoadError, Scenario, CHECKS, ESTIMATORS};
