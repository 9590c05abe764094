//! Scenario configuration, persistence and the acceptance-suite runner.

pub mod checks;
pub mod scenario;

pub use scenario::{run_scenario, RunRecord, Scenario};
