//! Command-line front end: artifact files, built-in sweeps, and plot-data
//! flattening on top of the core simulator.

pub mod artifacts;
pub mod plotdata;
pub mod sweeps;

pub use artifacts::{emit_artifacts, read_run_dir};

/// Seed used by every built-in sweep unless overridden on the command line.
pub const DEFAULT_SEED: u64 = 1;
