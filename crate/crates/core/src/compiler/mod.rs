//! Compilation pipeline emulating a device × family × setting option tree.
//!
//! Family A: trivial placement, routing, native decomposition, then the
//! option's optimization level. Family B: line or graph placement, routing,
//! decomposition, then a fixed O1 cleanup.

pub mod decompose;
pub mod optimize;
pub mod option;
pub mod place;
pub mod route;
pub mod synth;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, GateKind};
use crate::devices::DeviceModel;

pub use decompose::{decompose_to_native, decompose_with, is_device_legal};
pub use optimize::optimize;
pub use option::{device_for, enumerate_options, CompilationOption, Family, OptLevel, Setting};
pub use place::{place_graph, place_line, place_trivial, Layout, LinePlacement};
pub use route::{route, Routed};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("no devices given")]
    NoDevices,
    #[error("malformed compilation option `{0}`")]
    BadOption(String),
    #[error("unknown device `{0}`")]
    UnknownDevice(String),
    #[error("circuit needs {needed} qubits but `{device}` has {available}")]
    Infeasible {
        device: String,
        needed: usize,
        available: usize,
    },
    #[error("layout is not an injection into the device")]
    BadLayout,
    #[error("physical qubits {from} and {to} are not connected")]
    Disconnected { from: usize, to: usize },
    #[error("`{0}` must be lowered before routing")]
    NotLowered(GateKind),
    #[error("qubits {a} and {b} are not coupled")]
    UncoupledPair { a: usize, b: usize },
    #[error("no decomposition rule for `{0}`")]
    NoRule(GateKind),
    #[error("device `{0}` lacks a usable single-qubit or entangling basis")]
    NoBasis(String),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CompileStats {
    pub swaps: usize,
    pub native_gate_count: usize,
    /// Line placement found no path and used the trivial layout.
    pub placement_fallback: bool,
    /// Wall-clock seconds; filled in by callers that can measure time.
    pub compile_seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompiledResult {
    /// Device-legal circuit over the device's physical qubits.
    pub circuit: Circuit,
    pub initial_layout: Layout,
    /// Where each logical qubit ends up; measurements read this layout.
    pub final_layout: Layout,
    pub option: CompilationOption,
    pub stats: CompileStats,
}

/// Rewrites three-qubit gates into `cx` plus single-qubit gates so routing
/// only sees one- and two-qubit gates.
pub fn lower_for_routing(c: &Circuit) -> Circuit {
    let mut out = Circuit {
        name: c.name.clone(),
        num_qubits: c.num_qubits,
        num_clbits: c.num_clbits,
        ops: Vec::with_capacity(c.ops.len()),
    };
    for op in &c.ops {
        if op.kind.is_gate() && op.qubits.len() == 3 {
            out.ops.extend(synth::lower_three_qubit(op));
        } else {
            out.ops.push(op.clone());
        }
    }
    out
}

pub fn compile(
    c: &Circuit,
    opt: &CompilationOption,
    devices: &[DeviceModel],
) -> Result<CompiledResult, CompileError> {
    let d = device_for(opt, devices)?;
    if c.num_qubits > d.num_qubits {
        return Err(CompileError::Infeasible {
            device: d.id.clone(),
            needed: c.num_qubits,
            available: d.num_qubits,
        });
    }
    let lowered = lower_for_routing(c);
    let (layout, placement_fallback) = match opt.setting {
        Setting::Line => {
            let p = place_line(&lowered, d)?;
            (p.layout, p.fallback)
        }
        Setting::Graph => (place_graph(&lowered, d)?, false),
        _ => (place_trivial(&lowered, d)?, false),
    };
    let routed = route(&lowered, d, &layout)?;
    let level = opt.opt_level();
    let mut circuit = optimize(&decompose_with(&routed.circuit, d, false)?, level);
    if level == OptLevel::O3 && routed.swaps > 0 {
        // Reoriented swaps usually cancel more; keep whichever is smaller.
        let reused = optimize(&decompose_with(&routed.circuit, d, true)?, level);
        if reused.ops.len() <= circuit.ops.len() {
            circuit = reused;
        }
    }
    let stats = CompileStats {
        swaps: routed.swaps,
        native_gate_count: circuit.gate_count(),
        placement_fallback,
        compile_seconds: 0.0,
    };
    Ok(CompiledResult {
        circuit,
        initial_layout: routed.initial_layout,
        final_layout: routed.final_layout,
        option: opt.clone(),
        stats,
    })
}
