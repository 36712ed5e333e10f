//! Dense statevector simulation, used as the semantic oracle for compiled
//! circuits.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{Circuit, GateKind};
use crate::unitary::{gate_matrix, Matrix, ONE, ZERO};

/// Largest register the simulator accepts.
pub const MAX_SIM_QUBITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("{qubits} qubits exceed the simulator limit of {MAX_SIM_QUBITS}")]
    TooManyQubits { qubits: usize },
    #[error("`{0}` has no unitary; strip measurements before simulating")]
    Unsupported(GateKind),
    #[error("layout maps {layout} logical qubits but the circuit has {expected}")]
    LayoutSize { layout: usize, expected: usize },
    #[error("layout is not an injection into {physical} physical qubits")]
    LayoutNotInjective { physical: usize },
}

/// Applies `m` to the qubits `targets` (first target = most significant
/// matrix bit). Qubit `q` is bit `q` of the state index.
pub fn apply_matrix(state: &mut [Complex64], targets: &[usize], m: &Matrix) {
    let k = targets.len();
    let dim = 1usize << k;
    debug_assert_eq!(m.dim(), dim);
    let mask: usize = targets.iter().map(|&q| 1usize << q).sum();
    let offsets: Vec<usize> = (0..dim)
        .map(|local| {
            (0..k)
                .filter(|&j| local & (1 << (k - 1 - j)) != 0)
                .map(|j| 1usize << targets[j])
                .sum()
        })
        .collect();
    let mut buf = vec![ZERO; dim];
    for base in 0..state.len() {
        if base & mask != 0 {
            continue;
        }
        for (b, &off) in buf.iter_mut().zip(&offsets) {
            *b = state[base | off];
        }
        for (r, &off) in offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (c, &amp) in buf.iter().enumerate() {
                acc += m.get(r, c) * amp;
            }
            state[base | off] = acc;
        }
    }
}

/// Final state of `c` applied to |0...0⟩. Barriers are ignored.
pub fn simulate_statevector(c: &Circuit) -> Result<Vec<Complex64>, SimError> {
    if c.num_qubits > MAX_SIM_QUBITS {
        return Err(SimError::TooManyQubits { qubits: c.num_qubits });
    }
    let mut state = vec![ZERO; 1 << c.num_qubits];
    state[0] = ONE;
    for op in &c.ops {
        if op.kind == GateKind::Barrier {
            continue;
        }
        let m = gate_matrix(op.kind, &op.params).ok_or(SimError::Unsupported(op.kind))?;
        apply_matrix(&mut state, &op.qubits, &m);
    }
    Ok(state)
}

/// Per-amplitude tolerance of [`check_equivalence`].
pub const EQUIVALENCE_TOL: f64 = 1e-8;

/// Compares `a` (logical) with `b` (physical) under `layout[logical] =
/// physical`. States must agree up to a global phase, with every physical
/// qubit outside the layout left in |0⟩, and measurement targets must match
/// through the layout.
///
/// Only the qubits `b` touches (plus the layout image) are simulated, so a
/// small circuit routed onto a large device stays cheap.
pub fn check_equivalence(a: &Circuit, b: &Circuit, layout: &[usize]) -> Result<bool, SimError> {
    if layout.len() != a.num_qubits {
        return Err(SimError::LayoutSize {
            layout: layout.len(),
            expected: a.num_qubits,
        });
    }
    let mut seen = vec![false; b.num_qubits];
    for &p in layout {
        if p >= b.num_qubits || seen[p] {
            return Err(SimError::LayoutNotInjective { physical: b.num_qubits });
        }
        seen[p] = true;
    }

    let mut active = seen.clone();
    for q in b.active_qubits() {
        active[q] = true;
    }
    let mut compact = vec![usize::MAX; b.num_qubits];
    let mut width = 0;
    for (p, _) in active.iter().enumerate().filter(|(_, &on)| on) {
        compact[p] = width;
        width += 1;
    }
    if width > MAX_SIM_QUBITS {
        return Err(SimError::TooManyQubits { qubits: width });
    }

    let mut ma: Vec<(usize, usize)> = a
        .measurements()
        .into_iter()
        .map(|(q, c)| (c, layout[q]))
        .collect();
    let mut mb: Vec<(usize, usize)> = b.measurements().into_iter().map(|(q, c)| (c, q)).collect();
    ma.sort_unstable();
    mb.sort_unstable();
    if ma != mb {
        return Ok(false);
    }

    let sa = simulate_statevector(&a.without_directives())?;
    let sb = simulate_statevector(&b.without_directives().remapped(width, |q| compact[q]))?;

    let Some((pivot, _)) = sa
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm_sqr().total_cmp(&y.1.norm_sqr()))
    else {
        return Ok(true);
    };
    let image = |x: usize| -> usize {
        (0..a.num_qubits)
            .filter(|&q| x & (1 << q) != 0)
            .map(|q| 1usize << compact[layout[q]])
            .sum()
    };
    let target = sb[image(pivot)];
    if target.norm() < EQUIVALENCE_TOL {
        return Ok(false);
    }
    let phase = target / sa[pivot];
    let mut covered = 0.0;
    for (x, &amp) in sa.iter().enumerate() {
        let y = sb[image(x)];
        if (y - phase * amp).norm() > EQUIVALENCE_TOL {
            return Ok(false);
        }
        covered += y.norm_sqr();
    }
    // Everything outside the image must be empty.
    Ok((1.0 - covered).abs() < EQUIVALENCE_TOL)
}
