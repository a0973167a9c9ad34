//! Discrete-time simulation of push broadcast on a complete network whose
//! nodes are independently active with probability `p`.
//!
//! The crate is organised in four layers:
//!
//! - [`network`]: the [`NetworkState`] every protocol mutates, and how
//!   active sets are sampled.
//! - [`protocols`]: the push protocols, plus the coordinated oracle that
//!   lower-bounds all of them.
//! - [`theory`]: closed-form running-time constants and exact small-`N`
//!   completion-time laws used as validation oracles.
//! - [`harness`]: experiment specs and their summaries, with the property
//!   checks built on top.

pub mod error;
pub mod harness;
pub mod network;
pub mod protocols;
pub mod theory;

pub use error::{Error, Result};
pub use harness::{run_experiment, ExperimentSpec, SummaryStats};
pub use network::{
    informed_count, is_complete, sample_active, Algorithm, Bitmap, NetworkState, ProtocolConfig,
    RngStream,
};
pub use protocols::{
    longest_uninformed_run, run_cyclic, run_improved_cyclic, run_naive, run_oracle, run_protocol,
    step_naive, OracleStepper, Simulation, TraceResult,
};
