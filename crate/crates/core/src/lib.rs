//! Behavioral co-simulation of Tsetlin automata stored as analog conductance
//! in Y-Flash floating-gate memristors.
//!
//! - [`automata`]: automaton FSM and a small two-class Tsetlin Machine.
//! - [`device`]: phenomenological Y-Flash cell, population sampling, cycling.
//! - [`bridge`]: divergence-counter mapping from automaton motion to blind writes.
//! - [`array`]: selector-free crossbar and energy ledger.
//! - [`harness`]: experiment runners, CSV output and acceptance checks.

pub mod array;
pub mod automata;
pub mod bridge;
pub mod device;
mod error;
pub mod harness;

pub use error::{Error, Result};
