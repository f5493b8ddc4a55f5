//! Configuration-driven runner for noise sweeps, Monte Carlo protocol runs,
//! link budgets and single operating-point reports.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;

pub use config::{ExperimentConfig, Format, GridPoint, MediumEntry, SecurityConfig};
pub use error::CliError;
pub use runner::{run_linkbudget, run_protocol, run_report, run_sweep, RunSummary};
