//! Scenario runner for `qbm-core`: configuration, orchestration and the acceptance suite.

pub mod config;
pub mod scenario;
pub mod selftest;

pub use config::{parse_config, parse_config_str, ConfigError, ConfigIssue, OutputKind, ScenarioConfig, OUTPUT_DIR_ENV};
pub use scenario::{run_scenario, OutputReport, OutputStatus, RunError, RunReport};
