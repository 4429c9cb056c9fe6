//! Batch front end: configuration, run orchestration and file output.

pub mod config;
pub mod report;
pub mod run;
pub mod snapshot;
pub mod vtk;

pub use config::{load_config, parse_config, parse_config_with, ConfigError, Overrides, RunConfig};
pub use report::{read_report, write_report, ReportRow};
pub use run::{inspect, run, RunError, RunOutcome, EXIT_CONFIG, EXIT_DIVERGED, EXIT_IO, EXIT_OK};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};
