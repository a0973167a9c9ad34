//! Experiment orchestration over seeded Monte-Carlo ensembles, plus the
//! property and acceptance checks.
//!
//! Trial `t` of grid cell `c` runs on stream `c·trials_per_cell + t` of
//! `base_seed`, so any single row can be reproduced on its own.

pub mod acceptance;
pub mod checks;
mod experiment;
mod spec;
mod stats;
mod sweep;
mod verify;

pub use experiment::{
    execute, run_experiment, write_atomic, Execution, ExperimentOutput, TrialRow, TRAJECTORY_MAX_N,
};
pub use spec::{Cell, ExperimentSpec, OutputFormat};
pub use stats::{mean_sd, quantile, SummaryStats};
pub use sweep::{convergence_sweep, nonincreasing_trend, run_trials, SweepPoint};
pub use verify::{verify_suite, Level, Report};
