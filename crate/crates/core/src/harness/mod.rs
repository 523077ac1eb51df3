//! Configuration, experiment orchestration, persistence and reports.

pub mod config;
pub mod report;
pub mod run;
pub mod snapshot;
pub mod sweep;
pub mod verify;

pub use config::{schema, ExperimentKind, RunConfig, OUTPUT_ROOT_ENV};
pub use report::cmd_report;
pub use run::{cmd_run, run_into, RunMetadata, RunOutcome};
pub use snapshot::Snapshot;
pub use sweep::{cmd_sweep, sweep_into, MemberResult, SweepResult};
pub use verify::{cmd_verify, Fault, VerifyOptions, VerifyReport};
