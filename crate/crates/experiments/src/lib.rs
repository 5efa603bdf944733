//! Seeded Monte-Carlo experiments for hybrid AoD precoder design.

pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod runner;

pub use config::{ExperimentConfig, Scenario, SweepPoint, SweepValue, SweepVar};
pub use error::{ExperimentError, Result};
pub use runner::{run, run_design, ResultRow, RunOutput, TimingRow, TrialRecord};
