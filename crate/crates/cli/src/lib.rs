//! Command-line driver: config parsing, the four commands, seeded check
//! suites and versioned JSON/CSV reports.

pub mod commands;
pub mod config;
pub mod report;
pub mod suites;

pub use commands::{run, RunError, RunOutcome};
pub use config::{build, parse_config, Command, ConfigError, RunConfig};
pub use report::{read_report, SCHEMA_VERSION};
