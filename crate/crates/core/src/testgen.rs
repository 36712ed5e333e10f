//! Proptest strategies shared by the unit tests.

use alloc::vec::Vec;

use proptest::prelude::*;

use crate::circuit::{Circuit, GateKind, Instruction};

/// Any unitary gate on distinct qubits with angles in `[-2π, 2π]`.
pub fn instruction(n: usize) -> impl Strategy<Value = Instruction> {
    let kinds: Vec<GateKind> = GateKind::ALL
        .iter()
        .copied()
        .filter(|k| k.is_gate() && k.arity().is_some_and(|a| a <= n))
        .collect();
    proptest::sample::select(kinds).prop_flat_map(move |kind| {
        let arity = kind.arity().unwrap();
        (
            proptest::sample::subsequence((0..n).collect::<Vec<_>>(), arity).prop_shuffle(),
            proptest::collection::vec(-6.3f64..6.3, kind.num_params()),
        )
            .prop_map(move |(qubits, params)| Instruction::gate(kind, &qubits, &params))
    })
}

/// Random circuit on `qubits` qubits with up to `max_ops` gates, optionally
/// followed by a measurement of every qubit.
pub fn circuit(qubits: core::ops::RangeInclusive<usize>, max_ops: usize) -> impl Strategy<Value = Circuit> {
    qubits.prop_flat_map(move |n| {
        (proptest::collection::vec(instruction(n), 0..=max_ops), any::<bool>()).prop_map(move |(ops, measured)| {
            let mut c = Circuit::new(n, n);
            c.ops = ops;
            if measured {
                c.measure_all();
            }
            c
        })
    })
}
