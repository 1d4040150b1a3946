//! Experiment drivers behind the `singmap` command.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod report;
pub mod stats;
pub mod verify;

pub use config::{Experiment, ExperimentConfig, Profile};
pub use report::{Check, Report, SweepRow};
pub use verify::{run_experiment, verify};
