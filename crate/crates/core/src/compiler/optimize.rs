//! Peephole optimization levels.
//!
//! * O0: identity.
//! * O1: cancel adjacent inverse pairs, drop identity rotations.
//! * O2: O1, then repeated same-axis rotation fusion and cancellation while
//!   the gate count falls.
//! * O3: O2, then the same rewrites across commuting neighbors.
//!
//! Each level starts from the previous level's output and only removes or
//! merges gates, so gate counts never increase from one level to the next.

use alloc::vec;
use alloc::vec::Vec;

use super::option::OptLevel;
use super::synth::normalize_angle;
use crate::circuit::{Circuit, GateKind, Instruction};

/// Rotation angles at or below this magnitude (mod 2π) are identities. At
/// 2π every rotation here is ±I, a global phase.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Instructions inspected per backward scan in O3.
pub const COMMUTATION_WINDOW: usize = 32;

fn is_rotation(kind: GateKind) -> bool {
    use GateKind::*;
    matches!(kind, Rx | Ry | Rz | P | U1 | Rxx | Rzz | Cp | Cu1)
}

fn is_symmetric(kind: GateKind) -> bool {
    use GateKind::*;
    matches!(kind, Cz | Swap | Rxx | Rzz | Cp | Cu1)
}

fn is_identity(op: &Instruction) -> bool {
    match op.kind {
        GateKind::Id => true,
        k if is_rotation(k) => normalize_angle(op.params[0]).abs() <= IDENTITY_TOL,
        _ => false,
    }
}

fn same_operands(a: &Instruction, b: &Instruction) -> bool {
    a.qubits == b.qubits
        || (is_symmetric(a.kind)
            && a.qubits.len() == 2
            && b.qubits.len() == 2
            && a.qubits[0] == b.qubits[1]
            && a.qubits[1] == b.qubits[0])
}

fn inverse_pair(a: &Instruction, b: &Instruction) -> bool {
    use GateKind::*;
    let kinds_match = match (a.kind, b.kind) {
        (x, y) if x == y => matches!(x, X | Y | Z | H | Cx | Cy | Cz | Ch | Swap | Ccx | Cswap),
        (S, Sdg) | (Sdg, S) | (T, Tdg) | (Tdg, T) | (Sx, Sxdg) | (Sxdg, Sx) => true,
        _ => false,
    };
    kinds_match && same_operands(a, b)
}

/// Merge of `a` followed by `b`: `Some(None)` if they annihilate,
/// `Some(Some(g))` for a single replacement gate.
fn fuse(a: &Instruction, b: &Instruction) -> Option<Option<Instruction>> {
    if a.kind != b.kind || !same_operands(a, b) {
        return None;
    }
    if is_rotation(a.kind) {
        let mut merged = a.clone();
        merged.params[0] = normalize_angle(a.params[0] + b.params[0]);
        return Some(if is_identity(&merged) { None } else { Some(merged) });
    }
    match a.kind {
        GateKind::Sx | GateKind::Sxdg => Some(Some(Instruction::gate(GateKind::X, &a.qubits, &[]))),
        _ => None,
    }
}

/// Basis in which a gate is diagonal on one of its qubits.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Axis {
    Z,
    X,
    Y,
}

fn axis_on(op: &Instruction, q: usize) -> Option<Axis> {
    use GateKind::*;
    match op.kind {
        Id | Z | S | Sdg | T | Tdg | Rz | P | U1 | Cz | Cp | Cu1 | Rzz | Crz => Some(Axis::Z),
        X | Sx | Sxdg | Rx | Rxx => Some(Axis::X),
        Y | Ry => Some(Axis::Y),
        Cx => Some(if op.qubits[0] == q { Axis::Z } else { Axis::X }),
        _ => None,
    }
}

/// Sufficient commutation test: on every shared qubit both gates are
/// diagonal in the same basis.
fn commutes(a: &Instruction, b: &Instruction) -> bool {
    a.qubits.iter().filter(|q| b.qubits.contains(q)).all(|&q| {
        matches!((axis_on(a, q), axis_on(b, q)), (Some(x), Some(y)) if x == y)
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Pass {
    Cancel,
    Fuse,
    Commute,
}

struct Peephole {
    out: Vec<Option<Instruction>>,
    /// Live output indices per qubit, ascending.
    wires: Vec<Vec<usize>>,
}

impl Peephole {
    fn remove(&mut self, idx: usize) {
        let op = self.out[idx].take().expect("live instruction");
        for &q in &op.qubits {
            let w = &mut self.wires[q];
            if let Some(pos) = w.iter().rposition(|&i| i == idx) {
                w.remove(pos);
            }
        }
    }

    fn push(&mut self, op: Instruction) {
        let idx = self.out.len();
        for &q in &op.qubits {
            self.wires[q].push(idx);
        }
        self.out.push(Some(op));
    }

    /// Tries to absorb `op` into the instruction at `idx`.
    fn absorb(&mut self, idx: usize, op: &Instruction, pass: Pass) -> bool {
        let prev = self.out[idx].as_ref().expect("live instruction");
        if prev.qubits.len() != op.qubits.len() {
            return false;
        }
        if inverse_pair(prev, op) {
            self.remove(idx);
            return true;
        }
        if pass == Pass::Cancel {
            return false;
        }
        match fuse(prev, op) {
            Some(Some(merged)) => {
                self.out[idx] = Some(merged);
                true
            }
            Some(None) => {
                self.remove(idx);
                true
            }
            None => false,
        }
    }

    /// Most recent live instruction on all of `op`'s qubits, if it is the
    /// same one on each.
    fn adjacent(&self, op: &Instruction) -> Option<usize> {
        let first = *self.wires[op.qubits[0]].last()?;
        op.qubits[1..]
            .iter()
            .all(|&q| self.wires[q].last() == Some(&first))
            .then_some(first)
    }

    /// Candidates for `op` scanning backwards over commuting instructions.
    fn commuting_partner(&mut self, op: &Instruction, pass: Pass) -> bool {
        let mut cursors: Vec<usize> = op.qubits.iter().map(|&q| self.wires[q].len()).collect();
        for _ in 0..COMMUTATION_WINDOW {
            // Next most recent instruction touching any of op's qubits.
            let next = op
                .qubits
                .iter()
                .zip(&cursors)
                .filter_map(|(&q, &c)| c.checked_sub(1).map(|c| self.wires[q][c]))
                .max();
            let Some(idx) = next else { return false };
            if self.absorb(idx, op, pass) {
                return true;
            }
            let prev = self.out[idx].as_ref().expect("live instruction");
            if !commutes(prev, op) {
                return false;
            }
            for (&q, c) in op.qubits.iter().zip(cursors.iter_mut()) {
                if *c > 0 && self.wires[q][*c - 1] == idx {
                    *c -= 1;
                }
            }
        }
        false
    }

    fn run(c: &Circuit, pass: Pass) -> Circuit {
        let mut p = Peephole {
            out: Vec::with_capacity(c.ops.len()),
            wires: vec![Vec::new(); c.num_qubits],
        };
        for op in &c.ops {
            if !op.kind.is_gate() {
                p.push(op.clone());
                continue;
            }
            if is_identity(op) {
                continue;
            }
            let absorbed = match pass {
                Pass::Commute => p.commuting_partner(op, pass),
                _ => p.adjacent(op).is_some_and(|idx| p.absorb(idx, op, pass)),
            };
            if !absorbed {
                p.push(op.clone());
            }
        }
        Circuit {
            name: c.name.clone(),
            num_qubits: c.num_qubits,
            num_clbits: c.num_clbits,
            ops: p.out.into_iter().flatten().collect(),
        }
    }
}

fn repeat_while_shrinking(mut c: Circuit, pass: Pass) -> Circuit {
    loop {
        let next = Peephole::run(&c, pass);
        if next.ops.len() >= c.ops.len() {
            return if next.ops.len() == c.ops.len() { next } else { c };
        }
        c = next;
    }
}

pub fn optimize(c: &Circuit, level: OptLevel) -> Circuit {
    if level == OptLevel::O0 {
        return c.clone();
    }
    let o1 = Peephole::run(c, Pass::Cancel);
    if level == OptLevel::O1 {
        return o1;
    }
    let o2 = repeat_while_shrinking(o1, Pass::Fuse);
    if level == OptLevel::O2 {
        return o2;
    }
    repeat_while_shrinking(o2, Pass::Commute)
}
