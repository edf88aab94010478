//! Deterministic discrete-event simulation of a deadline-driven decode service.
//!
//! Jobs arrive from a configurable process, pass an admission check against a
//! bounded backlog, wait in a queue ordered by a scheduling policy (EDF or
//! FIFO), and occupy one of a fixed pool of servers for a service time drawn
//! from a parameterized cost model. Completions are classified against
//! per-job deadlines, optionally firing bounded rescue work. Everything runs
//! on an integer-nanosecond clock with named seeded random streams, so a run
//! is a pure function of its configuration and replays bit-identically.
//!
//! The crate is `no_std`-compatible (with `alloc`); the `std` feature is only
//! forwarded to dependencies. File formats, the CLI, and sweep orchestration
//! live in the companion `decsim` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod codes;
pub mod config;
pub mod costmodel;
pub mod engine;
pub mod metrics;
pub mod policy;
pub mod rng;
pub mod time;
pub mod workload;

use alloc::string::String;

pub use config::RunConfig;
pub use engine::{run, RunLog};
pub use time::Nanos;

/// Crate-wide error type.
///
/// `Config` rejects bad inputs before a run starts, `Invariant` reports an
/// internal self-check failure mid-run, and `Log` flags a run log that is
/// truncated or inconsistent with itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    Config(String),
    Invariant(String),
    Log(String),
}

impl core::fmt::Display for Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Invariant(msg) => write!(f, "invariant violation: {msg}"),
            Error::Log(msg) => write!(f, "bad run log: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
