//! Scenario files, CSV output and subcommands for the `srl-sim` tool.

pub mod commands;
pub mod config;
pub mod output;

pub use config::{parse_scenario, parse_scenario_str, ConfigError, ResolvedScenario};
