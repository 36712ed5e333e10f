//! Dependency structure of a circuit: ASAP layering, critical paths and the
//! qubit interaction graph.
//!
//! Dependencies run along qubit wires only. Measurements and barriers are
//! DAG nodes and occupy layers.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::circuit::Circuit;

/// ASAP layer assignment. Layers are 1-based; an empty circuit has depth 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepthSchedule {
    pub layer_of: Vec<usize>,
    pub depth: usize,
}

/// Each instruction lands one layer after the latest layer on any of its qubits.
pub fn circuit_depth(c: &Circuit) -> DepthSchedule {
    let mut wire = vec![0usize; c.num_qubits];
    let mut layer_of = Vec::with_capacity(c.ops.len());
    for op in &c.ops {
        let layer = op.qubits.iter().map(|&q| wire[q]).max().unwrap_or(0) + 1;
        for &q in &op.qubits {
            wire[q] = layer;
        }
        layer_of.push(layer);
    }
    let depth = layer_of.iter().copied().max().unwrap_or(0);
    DepthSchedule { layer_of, depth }
}

/// Marks the instructions lying on at least one longest dependency path.
pub fn on_critical_path(c: &Circuit) -> Vec<bool> {
    let sched = circuit_depth(c);
    // Longest path starting at each node, counted in nodes.
    let mut wire = vec![0usize; c.num_qubits];
    let mut tail = vec![0usize; c.ops.len()];
    for (i, op) in c.ops.iter().enumerate().rev() {
        let len = op.qubits.iter().map(|&q| wire[q]).max().unwrap_or(0) + 1;
        for &q in &op.qubits {
            wire[q] = len;
        }
        tail[i] = len;
    }
    (0..c.ops.len())
        .map(|i| sched.layer_of[i] + tail[i] - 1 == sched.depth)
        .collect()
}

/// Undirected qubit interaction graph with edge multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteractionGraph {
    pub num_qubits: usize,
    /// `(a, b, count)` with `a < b`, sorted by `(a, b)`.
    pub edges: Vec<(usize, usize, usize)>,
}

impl InteractionGraph {
    pub fn edge_set(&self) -> BTreeSet<(usize, usize)> {
        self.edges.iter().map(|&(a, b, _)| (a, b)).collect()
    }

    pub fn degree(&self, q: usize) -> usize {
        self.edges.iter().filter(|&&(a, b, _)| a == q || b == q).count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_qubits];
        for &(a, b, _) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    pub fn neighbors(&self, q: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter_map(move |&(a, b, _)| {
            if a == q {
                Some(b)
            } else if b == q {
                Some(a)
            } else {
                None
            }
        })
    }
}

/// Edge `{a, b}` exists iff some multi-qubit gate acts on both.
pub fn interaction_graph(c: &Circuit) -> InteractionGraph {
    let mut counts = alloc::collections::BTreeMap::new();
    for op in c.ops.iter().filter(|op| op.kind.is_multi_qubit()) {
        for (i, &a) in op.qubits.iter().enumerate() {
            for &b in &op.qubits[i + 1..] {
                *counts.entry((a.min(b), a.max(b))).or_insert(0usize) += 1;
            }
        }
    }
    InteractionGraph {
        num_qubits: c.num_qubits,
        edges: counts.into_iter().map(|((a, b), n)| (a, b, n)).collect(),
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    /// Reorders `c` by repeatedly taking the `pick`-th ready instruction,
    /// where ready means every earlier instruction on a shared wire is placed.
    fn topological_shuffle(c: &Circuit, picks: &[usize]) -> Circuit {
        let wires = |i: usize| {
            let op = &c.ops[i];
            let mut w: Vec<usize> = op.qubits.clone();
            w.extend(op.clbit.map(|b| c.num_qubits + b));
            w
        };
        let mut placed = vec![false; c.ops.len()];
        let mut out = c.clone();
        out.ops.clear();
        for step in 0..c.ops.len() {
            let ready: Vec<usize> = (0..c.ops.len())
                .filter(|&i| !placed[i])
                .filter(|&i| {
                    (0..i).all(|j| placed[j] || wires(j).iter().all(|w| !wires(i).contains(w)))
                })
                .collect();
            let i = ready[picks[step % picks.len()] % ready.len()];
            placed[i] = true;
            out.ops.push(c.ops[i].clone());
        }
        out
    }

    proptest! {
        #[test]
        fn depth_ignores_topological_order(
            c in crate::testgen::circuit(1..=5, 25),
            picks in proptest::collection::vec(0usize..100, 1..20),
        ) {
            let shuffled = topological_shuffle(&c, &picks);
            prop_assert_eq!(circuit_depth(&shuffled).depth, circuit_depth(&c).depth);
        }
    }
}
