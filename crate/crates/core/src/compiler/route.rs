//! Greedy SWAP routing along shortest coupling paths.

use alloc::vec;
use alloc::vec::Vec;

use super::place::Layout;
use super::CompileError;
use crate::circuit::{Circuit, GateKind, Instruction};
use crate::devices::{DeviceModel, UNREACHABLE};

/// A circuit over the device's physical qubits. Two-qubit gates act on
/// adjacent qubits (in either direction); `swap` gates are still present.
#[derive(Clone, Debug, PartialEq)]
pub struct Routed {
    pub circuit: Circuit,
    pub initial_layout: Layout,
    pub final_layout: Layout,
    pub swaps: usize,
}

/// For each instruction, true if it is a measurement with no later gate or
/// measurement on the same qubit.
fn terminal_measurements(c: &Circuit) -> Vec<bool> {
    let mut touched_later = vec![false; c.num_qubits];
    let mut terminal = vec![false; c.ops.len()];
    for (i, op) in c.ops.iter().enumerate().rev() {
        match op.kind {
            GateKind::Barrier => {}
            GateKind::Measure => {
                let q = op.qubits[0];
                terminal[i] = !touched_later[q];
                touched_later[q] = true;
            }
            _ => op.qubits.iter().for_each(|&q| touched_later[q] = true),
        }
    }
    terminal
}

/// Routes `c` from `layout`. For each two-qubit gate on non-adjacent qubits
/// the first operand is swapped along a shortest path (lowest next node on
/// ties) until adjacent. Terminal measurements move to the end and read the
/// final layout.
pub fn route(c: &Circuit, d: &DeviceModel, layout: &[usize]) -> Result<Routed, CompileError> {
    if c.num_qubits > d.num_qubits {
        return Err(CompileError::Infeasible {
            device: d.id.clone(),
            needed: c.num_qubits,
            available: d.num_qubits,
        });
    }
    if layout.len() != c.num_qubits {
        return Err(CompileError::BadLayout);
    }
    let mut p2l: Vec<Option<usize>> = vec![None; d.num_qubits];
    for (q, &p) in layout.iter().enumerate() {
        if p >= d.num_qubits || p2l[p].is_some() {
            return Err(CompileError::BadLayout);
        }
        p2l[p] = Some(q);
    }
    let mut l2p: Layout = layout.to_vec();
    let terminal = terminal_measurements(c);
    let mut deferred = Vec::new();
    let mut out = Circuit::new(d.num_qubits, c.num_clbits).named(c.name.clone());
    let mut swaps = 0;

    for (op, &is_terminal) in c.ops.iter().zip(&terminal) {
        if is_terminal {
            deferred.push((op.qubits[0], op.clbit.expect("measure has a clbit")));
            continue;
        }
        if op.kind.is_gate() && op.qubits.len() > 2 {
            return Err(CompileError::NotLowered(op.kind));
        }
        if op.kind.is_gate() && op.qubits.len() == 2 {
            let (a, b) = (op.qubits[0], op.qubits[1]);
            let target = l2p[b];
            if d.distance(l2p[a], target) == UNREACHABLE {
                return Err(CompileError::Disconnected {
                    from: l2p[a],
                    to: target,
                });
            }
            while d.distance(l2p[a], target) > 1 {
                let u = l2p[a];
                let remaining = d.distance(u, target);
                let v = d
                    .neighbors(u)
                    .iter()
                    .copied()
                    .find(|&v| d.distance(v, target) + 1 == remaining)
                    .expect("a shortest-path successor exists");
                out.ops.push(Instruction::gate(GateKind::Swap, &[u, v], &[]));
                swaps += 1;
                let (lu, lv) = (p2l[u], p2l[v]);
                p2l[u] = lv;
                p2l[v] = lu;
                for (l, p) in [(lu, v), (lv, u)] {
                    if let Some(l) = l {
                        l2p[l] = p;
                    }
                }
            }
        }
        let mut mapped = op.clone();
        mapped.qubits.iter_mut().for_each(|q| *q = l2p[*q]);
        out.ops.push(mapped);
    }
    for (q, clbit) in deferred {
        out.ops.push(Instruction::measure(l2p[q], clbit));
    }
    Ok(Routed {
        circuit: out,
        initial_layout: layout.to_vec(),
        final_layout: l2p,
        swaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::builtin_devices;
    use crate::sim::check_equivalence;

    fn adjacent_everywhere(c: &Circuit, d: &DeviceModel) -> bool {
        c.ops
            .iter()
            .filter(|op| op.kind.is_gate() && op.qubits.len() == 2)
            .all(|op| d.distance(op.qubits[0], op.qubits[1]) == 1)
    }

    #[test]
    fn coupled_pair_needs_no_swaps() {
        let ring = &builtin_devices()[0];
        let mut c = Circuit::new(2, 0);
        c.apply(GateKind::Cx, &[0, 1], &[]);
        let r = route(&c, ring, &[0, 1]).unwrap();
        assert_eq!(r.swaps, 0);
        assert_eq!(r.circuit.ops, vec![Instruction::gate(GateKind::Cx, &[0, 1], &[])]);
    }

    #[test]
    fn distance_two_needs_one_swap() {
        let ring = &builtin_devices()[0];
        let mut c = Circuit::new(3, 0);
        c.apply(GateKind::Cx, &[0, 2], &[]);
        let r = route(&c, ring, &[0, 1, 2]).unwrap();
        assert_eq!(r.swaps, 1);
        assert_eq!(r.circuit.ops[0], Instruction::gate(GateKind::Swap, &[0, 1], &[]));
        assert_eq!(r.final_layout, vec![1, 0, 2]);
        assert!(adjacent_everywhere(&r.circuit, ring));
        assert!(check_equivalence(&c, &r.circuit, &r.final_layout).unwrap());
    }

    #[test]
    fn ghz_routed_on_ring_is_equivalent() {
        let ring = &builtin_devices()[0];
        let mut c = Circuit::new(3, 3);
        c.apply(GateKind::H, &[0], &[])
            .apply(GateKind::Cx, &[0, 1], &[])
            .apply(GateKind::Cx, &[1, 2], &[])
            .measure_all();
        // Scattered start so swaps are needed.
        let r = route(&c, ring, &[0, 4, 2]).unwrap();
        assert!(r.swaps > 0);
        assert!(adjacent_everywhere(&r.circuit, ring));
        assert!(check_equivalence(&c, &r.circuit, &r.final_layout).unwrap());
        // Measurements are last and use the final layout.
        let tail: Vec<_> = r.circuit.ops.iter().rev().take(3).collect();
        assert!(tail.iter().all(|op| op.kind == GateKind::Measure));
    }

    #[test]
    fn mid_circuit_measurement_stays_in_place() {
        let mut c = Circuit::new(2, 2);
        c.apply(GateKind::H, &[0], &[]).measure(0, 0);
        c.apply(GateKind::X, &[0], &[]).measure(1, 1);
        let t = terminal_measurements(&c);
        assert_eq!(t, vec![false, false, false, true]);
        let ring = &builtin_devices()[0];
        let r = route(&c, ring, &[0, 1]).unwrap();
        assert_eq!(r.circuit.ops[1].kind, GateKind::Measure);
    }

    #[test]
    fn bad_layouts_rejected() {
        let ring = &builtin_devices()[0];
        let c = Circuit::new(2, 0);
        assert_eq!(route(&c, ring, &[0, 0]), Err(CompileError::BadLayout));
        assert_eq!(route(&c, ring, &[0, 9]), Err(CompileError::BadLayout));
        assert_eq!(route(&c, ring, &[0]), Err(CompileError::BadLayout));
    }
}
