//! Experiment harness for `gmc-core`: TOML configuration, a deterministic
//! replica pool, report emission (CSV, JSON, markdown) and file formats.
//!
//! Replica `i` of a run always draws from `split(seed, i)`, and aggregates
//! are formed in replica order, so reports are byte-identical across thread
//! counts.

pub mod config;
pub mod experiments;
pub mod formats;
pub mod report;

pub use config::{ExperimentConfig, Kind};
pub use experiments::{run_experiment, write_outputs, Outcome};
pub use report::RunReport;
