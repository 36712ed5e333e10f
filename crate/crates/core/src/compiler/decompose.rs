//! Rewriting into a device's native gate set.

use alloc::vec;
use alloc::vec::Vec;

use super::synth::{ion_cx, lower_three_qubit, lower_two_qubit, swap_as_cx, synth_zsx, synth_zyz};
use super::CompileError;
use crate::circuit::{Circuit, GateKind, Instruction};
use crate::devices::DeviceModel;
use crate::unitary::gate_matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum OneQubitBasis {
    Zsx,
    Zyz,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Entangler {
    Cx,
    Rxx,
}

struct Decomposer<'a> {
    d: &'a DeviceModel,
    basis: OneQubitBasis,
    entangler: Entangler,
    swap_reuse: bool,
    out: Vec<Instruction>,
    /// Index in `out` of the last instruction on each physical qubit.
    last: Vec<Option<usize>>,
}

impl Decomposer<'_> {
    fn push(&mut self, op: Instruction) {
        let idx = self.out.len();
        for &q in &op.qubits {
            self.last[q] = Some(idx);
        }
        self.out.push(op);
    }

    fn legal(&self, op: &Instruction) -> bool {
        if !self.d.is_native(op.kind) {
            return false;
        }
        match *op.qubits.as_slice() {
            [a, b] => self.d.is_coupled(a, b),
            _ => true,
        }
    }

    fn emit(&mut self, op: Instruction) -> Result<(), CompileError> {
        if op.kind == GateKind::Barrier || self.legal(&op) {
            self.push(op);
            return Ok(());
        }
        match op.qubits.len() {
            1 if op.kind == GateKind::Measure => Err(CompileError::NoRule(op.kind)),
            1 => {
                let m = gate_matrix(op.kind, &op.params).ok_or(CompileError::NoRule(op.kind))?;
                let q = op.qubits[0];
                let ops = match self.basis {
                    OneQubitBasis::Zsx => synth_zsx(&m, q),
                    OneQubitBasis::Zyz => synth_zyz(&m, q),
                };
                ops.into_iter().for_each(|o| self.push(o));
                Ok(())
            }
            2 => self.emit_two_qubit(op),
            _ => self.emit_all(lower_three_qubit(&op)),
        }
    }

    fn emit_all(&mut self, ops: Vec<Instruction>) -> Result<(), CompileError> {
        ops.into_iter().try_for_each(|o| self.emit(o))
    }

    fn emit_two_qubit(&mut self, op: Instruction) -> Result<(), CompileError> {
        let (a, b) = (op.qubits[0], op.qubits[1]);
        if !self.d.is_coupled(a, b) && !self.d.is_coupled(b, a) {
            return Err(CompileError::UncoupledPair { a, b });
        }
        let symmetric = matches!(
            op.kind,
            GateKind::Rxx | GateKind::Rzz | GateKind::Cz | GateKind::Cp | GateKind::Cu1 | GateKind::Swap
        );
        if symmetric && self.d.is_native(op.kind) {
            self.push(Instruction::gate(op.kind, &[b, a], &op.params));
            return Ok(());
        }
        match (op.kind, self.entangler) {
            (GateKind::Cx, Entangler::Cx) => {
                // Only the reverse direction is coupled.
                let h = |q| Instruction::gate(GateKind::H, &[q], &[]);
                self.emit_all(vec![
                    h(a),
                    h(b),
                    Instruction::gate(GateKind::Cx, &[b, a], &[]),
                    h(a),
                    h(b),
                ])
            }
            (GateKind::Cx, Entangler::Rxx) => {
                let mut ops = ion_cx(a, b);
                if !self.d.is_coupled(a, b) {
                    ops[1].qubits.reverse();
                }
                self.emit_all(ops)
            }
            (GateKind::Swap, _) => {
                let first = if self.swap_reuse { self.reusable_control(a, b) } else { a };
                self.emit_all(swap_as_cx(a, b, first))
            }
            _ => self.emit_all(lower_two_qubit(&op)),
        }
    }

    /// Control of the `cx` that last touched `{a, b}` if it acted on exactly
    /// that pair, so the swap's first `cx` cancels against it.
    fn reusable_control(&self, a: usize, b: usize) -> usize {
        let last = match (self.last[a], self.last[b]) {
            (Some(x), Some(y)) => x.max(y),
            _ => return a,
        };
        let op = &self.out[last];
        let on_pair = op.qubits.len() == 2 && op.qubits.contains(&a) && op.qubits.contains(&b);
        if on_pair && op.kind == GateKind::Cx {
            op.qubits[0]
        } else {
            a
        }
    }
}

/// Rewrites `c` into `d`'s native gates. Native gates on legal qubit pairs
/// pass through unchanged; two-qubit gates must already act on coupled pairs.
pub fn decompose_to_native(c: &Circuit, d: &DeviceModel) -> Result<Circuit, CompileError> {
    decompose_with(c, d, false)
}

/// As [`decompose_to_native`]; with `swap_reuse`, each `swap` is oriented so
/// its first `cx` matches a directly preceding `cx` on the same pair.
pub fn decompose_with(c: &Circuit, d: &DeviceModel, swap_reuse: bool) -> Result<Circuit, CompileError> {
    let native = |k| d.is_native(k);
    let basis = if native(GateKind::Rz) && native(GateKind::Sx) {
        OneQubitBasis::Zsx
    } else if native(GateKind::Rz) && native(GateKind::Ry) {
        OneQubitBasis::Zyz
    } else {
        return Err(CompileError::NoBasis(d.id.clone()));
    };
    let entangler = if native(GateKind::Cx) {
        Entangler::Cx
    } else if native(GateKind::Rxx) {
        Entangler::Rxx
    } else {
        return Err(CompileError::NoBasis(d.id.clone()));
    };
    let mut dec = Decomposer {
        d,
        basis,
        entangler,
        swap_reuse,
        out: Vec::with_capacity(c.ops.len()),
        last: vec![None; c.num_qubits],
    };
    for op in &c.ops {
        dec.emit(op.clone())?;
    }
    Ok(Circuit {
        name: c.name.clone(),
        num_qubits: c.num_qubits,
        num_clbits: c.num_clbits,
        ops: dec.out,
    })
}

/// Every gate is native and every two-qubit gate acts on a coupled pair.
/// Barriers are allowed.
pub fn is_device_legal(c: &Circuit, d: &DeviceModel) -> bool {
    c.num_qubits <= d.num_qubits
        && c.ops.iter().all(|op| {
            if op.kind == GateKind::Barrier {
                return true;
            }
            d.is_native(op.kind)
                && match *op.qubits.as_slice() {
                    [a, b] => d.is_coupled(a, b),
                    [_] => true,
                    _ => false,
                }
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::builtin_devices;
    use crate::sim::check_equivalence;

    fn on_device(d: &DeviceModel, build: impl FnOnce(&mut Circuit)) -> Circuit {
        let mut c = Circuit::new(d.num_qubits, 0);
        build(&mut c);
        c
    }

    fn same_up_to_phase(a: &Circuit, b: &Circuit) -> bool {
        // Only the touched qubits matter; the identity layout keeps them aligned.
        let n = a.num_qubits.min(crate::sim::MAX_SIM_QUBITS);
        let shrink = |c: &Circuit| c.remapped(n, |q| q);
        let layout: Vec<usize> = (0..n).collect();
        check_equivalence(&shrink(a), &shrink(b), &layout).unwrap()
    }

    #[test]
    fn h_on_superconducting() {
        let d = &builtin_devices()[0];
        let c = on_device(d, |c| {
            c.apply(GateKind::H, &[0], &[]);
        });
        let out = decompose_to_native(&c, d).unwrap();
        let kinds: Vec<GateKind> = out.ops.iter().map(|o| o.kind).collect();
        assert_eq!(kinds, vec![GateKind::Rz, GateKind::Sx, GateKind::Rz]);
        assert!(is_device_legal(&out, d));
        assert!(same_up_to_phase(&c, &out));
    }

    #[test]
    fn cx_on_ion_trap_uses_one_rxx() {
        let d = &builtin_devices()[1];
        let c = on_device(d, |c| {
            c.apply(GateKind::Cx, &[2, 5], &[]);
        });
        let out = decompose_to_native(&c, d).unwrap();
        assert!(is_device_legal(&out, d));
        assert_eq!(out.count_kind(GateKind::Rxx), 1);
        assert!(same_up_to_phase(&c, &out));
    }

    #[test]
    fn native_circuit_is_a_fixpoint() {
        let fleet = builtin_devices();
        let mut sc = Circuit::new(8, 1);
        sc.apply(GateKind::Rz, &[0], &[0.3])
            .apply(GateKind::Sx, &[0], &[])
            .apply(GateKind::X, &[1], &[])
            .apply(GateKind::Cx, &[1, 0], &[])
            .measure(0, 0);
        assert_eq!(decompose_to_native(&sc, &fleet[0]).unwrap(), sc);
        let ion = on_device(&fleet[1], |c| {
            c.apply(GateKind::Rxx, &[3, 1], &[0.2]).apply(GateKind::Ry, &[0], &[1.0]);
        });
        assert_eq!(decompose_to_native(&ion, &fleet[1]).unwrap(), ion);
    }

    #[test]
    fn every_gate_on_both_technologies() {
        let fleet = builtin_devices();
        for d in [&fleet[0], &fleet[1]] {
            // Three-qubit gates need routing first unless coupling is complete.
            let complete = d.technology == crate::devices::Technology::IonTrap;
            for &k in GateKind::ALL.iter().filter(|k| k.is_gate() && (complete || k.arity() != Some(3))) {
                let params: Vec<f64> = (0..k.num_params()).map(|i| 0.4 + 0.9 * i as f64).collect();
                let qubits: Vec<usize> = (0..k.arity().unwrap()).collect();
                let c = on_device(d, |c| {
                    c.apply(GateKind::H, &[0], &[]).apply(GateKind::Ry, &[1], &[0.7]);
                    c.apply(k, &qubits, &params);
                });
                let out = decompose_to_native(&c, d).unwrap();
                assert!(is_device_legal(&out, d), "{k} on {}", d.id);
                assert!(same_up_to_phase(&c, &out), "{k} on {}", d.id);
            }
        }
    }

    #[test]
    fn uncoupled_pair_rejected() {
        let d = &builtin_devices()[0];
        let c = on_device(d, |c| {
            c.apply(GateKind::Cx, &[0, 4], &[]);
        });
        assert_eq!(decompose_to_native(&c, d), Err(CompileError::UncoupledPair { a: 0, b: 4 }));
    }

    #[test]
    fn swap_reuse_orients_after_cx() {
        let d = &builtin_devices()[0];
        let c = on_device(d, |c| {
            c.apply(GateKind::Cx, &[1, 0], &[]).apply(GateKind::Swap, &[0, 1], &[]);
        });
        let plain = decompose_to_native(&c, d).unwrap();
        let reuse = decompose_with(&c, d, true).unwrap();
        assert_eq!(plain.ops[1].qubits, vec![0, 1]);
        assert_eq!(reuse.ops[1].qubits, vec![1, 0]);
        assert!(same_up_to_phase(&plain, &reuse));
    }
}
