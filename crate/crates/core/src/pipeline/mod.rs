//! Configured, reproducible runs of the experiments: mode functions, the
//! photon-subtraction cutoff scan, the teleportation comparison and a
//! tomography round trip.

pub mod config;
pub mod report;
pub mod run;

pub use config::{ExperimentKind, RunConfig};
pub use report::{load_summary, render, report};
pub use run::{run, Check, Results, RunSummary};
