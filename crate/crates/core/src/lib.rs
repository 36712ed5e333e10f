//! Core of the compilation-option predictor.
//!
//! Everything here is pure computation over in-memory values and builds
//! without `std` (an allocator is required). File formats, timing, parallel
//! sweeps and the command line live in the companion `qpredict` crate.

#![no_std]

extern crate alloc;

pub mod circuit;
pub mod compiler;
pub mod corpus;
pub mod dag;
pub mod eval;
pub mod devices;
pub mod features;
pub mod ml;
pub mod qasm;
pub mod scoring;
pub mod sim;
pub mod unitary;

#[cfg(test)]
mod testgen;

pub use circuit::{Circuit, CircuitError, GateKind, Instruction};
pub use qasm::{emit_qasm, parse_qasm, QasmError};
