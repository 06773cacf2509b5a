//! Scenario files, output formats and subcommands of the `jamiton` tool.

pub mod commands;
pub mod output;
pub mod scenario;
pub mod svg;

pub use commands::{exit_code, run, RunOptions};
pub use scenario::{load_scenario, ConfigError, Scenario, TaskKind};
