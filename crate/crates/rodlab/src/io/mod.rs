//! Job configuration, runners, and text export.
//!
//! One invocation runs one job: parse a TOML config, resolve the scenario
//! into a rod state, perform the requested action, and leave a deterministic
//! set of plain-text artifacts in the output directory alongside a normalized
//! copy of the config itself.

pub mod config;
pub mod export;
pub mod run;

pub use config::{
    parse_config, parse_config_str, Action, BcsSection, EndsKind, GridSection, JobConfig,
    ParamsSection, ResolvedJob, ScenarioConfig,
};
pub use export::{export_centerline, export_series, read_field_snapshot, write_field_snapshot};
pub use run::{run, RunReport};
