//! Seeded benchmark-circuit generators.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, GateKind};
use crate::ml::stream_rng;

pub const MIN_QUBITS: usize = 2;
pub const MAX_QUBITS: usize = 130;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("unknown circuit family `{0}`")]
    UnknownFamily(String),
    #[error("qubit range {min}..={max} is not within 2..=130")]
    QubitRange { min: usize, max: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircuitFamily {
    Ghz,
    Wstate,
    Dj,
    Qft,
    Grover,
    Qaoa,
    Random,
}

impl CircuitFamily {
    pub const ALL: [CircuitFamily; 7] = [
        CircuitFamily::Ghz,
        CircuitFamily::Wstate,
        CircuitFamily::Dj,
        CircuitFamily::Qft,
        CircuitFamily::Grover,
        CircuitFamily::Qaoa,
        CircuitFamily::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CircuitFamily::Ghz => "ghz",
            CircuitFamily::Wstate => "wstate",
            CircuitFamily::Dj => "dj",
            CircuitFamily::Qft => "qft",
            CircuitFamily::Grover => "grover",
            CircuitFamily::Qaoa => "qaoa",
            CircuitFamily::Random => "random",
        }
    }
}

impl fmt::Display for CircuitFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CircuitFamily {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CircuitFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| CorpusError::UnknownFamily(String::from(s)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub families: Vec<CircuitFamily>,
    pub min_qubits: usize,
    pub max_qubits: usize,
    pub seed: u64,
    /// Random circuits per qubit count.
    pub random_per_size: usize,
    /// QAOA instances per qubit count; instance `i` has `i + 1` layers.
    pub qaoa_per_size: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            families: CircuitFamily::ALL.to_vec(),
            min_qubits: MIN_QUBITS,
            max_qubits: MAX_QUBITS,
            seed: 1,
            random_per_size: 10,
            qaoa_per_size: 2,
        }
    }
}

fn stream(family: CircuitFamily, n: usize, instance: usize) -> u64 {
    ((family as u64) << 48) | ((n as u64) << 16) | instance as u64
}

/// Every circuit of `spec`, family by family in the listed order, then by
/// qubit count, then by instance. Grover instances are indexed by total
/// width (search register plus ancillas) and only exist for widths 2, 3, 5,
/// 7, 9 and 11.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<Vec<Circuit>, CorpusError> {
    let (min, max) = (spec.min_qubits, spec.max_qubits);
    if min < MIN_QUBITS || max > MAX_QUBITS || min > max {
        return Err(CorpusError::QubitRange { min, max });
    }
    let mut out = Vec::new();
    for &family in &spec.families {
        match family {
            CircuitFamily::Grover => {
                for k in 2..=7 {
                    let c = grover(k, spec.seed);
                    if (min..=max).contains(&c.num_qubits) {
                        out.push(c);
                    }
                }
            }
            CircuitFamily::Qaoa => {
                for n in min..=max {
                    out.extend((0..spec.qaoa_per_size).map(|i| qaoa(n, i, spec.seed)));
                }
            }
            CircuitFamily::Random => {
                for n in min..=max {
                    out.extend((0..spec.random_per_size).map(|i| random_circuit(n, i, spec.seed)));
                }
            }
            CircuitFamily::Ghz => out.extend((min..=max).map(ghz)),
            CircuitFamily::Wstate => out.extend((min..=max).map(wstate)),
            CircuitFamily::Dj => out.extend((min..=max).map(|n| deutsch_jozsa(n, spec.seed))),
            CircuitFamily::Qft => out.extend((min..=max).map(qft)),
        }
    }
    Ok(out)
}

/// `h(0)`, a `cx` chain, then every qubit measured.
pub fn ghz(n: usize) -> Circuit {
    let mut c = Circuit::new(n, n).named(format!("ghz_n{n}"));
    c.apply(GateKind::H, &[0], &[]);
    for i in 0..n - 1 {
        c.apply(GateKind::Cx, &[i, i + 1], &[]);
    }
    c.measure_all();
    c
}

/// Equal superposition of the `n` one-hot basis states.
pub fn wstate(n: usize) -> Circuit {
    let mut c = Circuit::new(n, n).named(format!("wstate_n{n}"));
    c.apply(GateKind::X, &[0], &[]);
    for k in 0..n - 1 {
        // Keep amplitude 1/√(n−k) on qubit k and pass the rest on.
        let theta = 2.0 * libm::acos(libm::sqrt(1.0 / (n - k) as f64));
        c.apply(GateKind::Cry, &[k, k + 1], &[theta]);
        c.apply(GateKind::Cx, &[k + 1, k], &[]);
    }
    c.measure_all();
    c
}

/// Deutsch-Jozsa over `n − 1` inputs and one ancilla (the last qubit) with a
/// seeded balanced oracle `f(x) = s·(x ⊕ b) mod 2`, `s ≠ 0`.
pub fn deutsch_jozsa(n: usize, seed: u64) -> Circuit {
    let mut rng = stream_rng(seed, stream(CircuitFamily::Dj, n, 0));
    let inputs = n - 1;
    let anc = n - 1;
    let mut s: Vec<bool> = (0..inputs).map(|_| rng.random()).collect();
    if !s.contains(&true) {
        s[rng.random_range(0..inputs)] = true;
    }
    let b: Vec<bool> = (0..inputs).map(|_| rng.random()).collect();
    let mut c = Circuit::new(n, inputs).named(format!("dj_n{n}"));
    c.apply(GateKind::X, &[anc], &[]);
    (0..n).for_each(|q| {
        c.apply(GateKind::H, &[q], &[]);
    });
    let flips: Vec<usize> = (0..inputs).filter(|&q| b[q]).collect();
    flips.iter().for_each(|&q| {
        c.apply(GateKind::X, &[q], &[]);
    });
    for q in (0..inputs).filter(|&q| s[q]) {
        c.apply(GateKind::Cx, &[q, anc], &[]);
    }
    flips.iter().for_each(|&q| {
        c.apply(GateKind::X, &[q], &[]);
    });
    for q in 0..inputs {
        c.apply(GateKind::H, &[q], &[]).measure(q, q);
    }
    c
}

/// Textbook QFT with controlled phases and the final reversal swaps.
pub fn qft(n: usize) -> Circuit {
    let mut c = Circuit::new(n, n).named(format!("qft_n{n}"));
    for j in 0..n {
        c.apply(GateKind::H, &[j], &[]);
        for k in j + 1..n {
            let angle = PI / libm::pow(2.0, (k - j) as f64);
            c.apply(GateKind::Cp, &[k, j], &[angle]);
        }
    }
    for j in 0..n / 2 {
        c.apply(GateKind::Swap, &[j, n - 1 - j], &[]);
    }
    c.measure_all();
    c
}

/// Multi-controlled X as a V-chain of Toffolis; needs `controls − 2`
/// clean ancillas, returned to |0⟩.
fn mcx(c: &mut Circuit, controls: &[usize], target: usize, ancillas: &[usize]) {
    match controls.len() {
        1 => {
            c.apply(GateKind::Cx, &[controls[0], target], &[]);
        }
        2 => {
            c.apply(GateKind::Ccx, &[controls[0], controls[1], target], &[]);
        }
        m => {
            let mut chain = Vec::with_capacity(m - 2);
            chain.push([controls[0], controls[1], ancillas[0]]);
            for i in 2..m - 1 {
                chain.push([controls[i], ancillas[i - 2], ancillas[i - 1]]);
            }
            chain.iter().for_each(|g| {
                c.apply(GateKind::Ccx, g, &[]);
            });
            c.apply(GateKind::Ccx, &[controls[m - 1], ancillas[m - 3], target], &[]);
            chain.iter().rev().for_each(|g| {
                c.apply(GateKind::Ccx, g, &[]);
            });
        }
    }
}

/// Phase flip of |1…1⟩ on `qubits`.
fn mcz(c: &mut Circuit, qubits: &[usize], ancillas: &[usize]) {
    let (&target, controls) = qubits.split_last().expect("at least one qubit");
    if controls.len() == 1 {
        c.apply(GateKind::Cz, &[controls[0], target], &[]);
        return;
    }
    c.apply(GateKind::H, &[target], &[]);
    mcx(c, controls, target, ancillas);
    c.apply(GateKind::H, &[target], &[]);
}

/// Grover search for one seeded marked item over `k` qubits, with
/// `⌊π/4·√2^k⌋` iterations. Qubits `k..` are ancillas for the oracle.
pub fn grover(k: usize, seed: u64) -> Circuit {
    let n = k + k.saturating_sub(3);
    let mut rng = stream_rng(seed, stream(CircuitFamily::Grover, k, 0));
    let marked = rng.random_range(0..1usize << k);
    let data: Vec<usize> = (0..k).collect();
    let anc: Vec<usize> = (k..n).collect();
    let mut c = Circuit::new(n, k).named(format!("grover_n{n}"));
    let layer = |c: &mut Circuit, kind: GateKind, qs: &[usize]| {
        qs.iter().for_each(|&q| {
            c.apply(kind, &[q], &[]);
        });
    };
    layer(&mut c, GateKind::H, &data);
    let zeros: Vec<usize> = data.iter().copied().filter(|&q| marked >> q & 1 == 0).collect();
    let iterations = libm::floor(PI / 4.0 * libm::sqrt((1usize << k) as f64)) as usize;
    for _ in 0..iterations {
        layer(&mut c, GateKind::X, &zeros);
        mcz(&mut c, &data, &anc);
        layer(&mut c, GateKind::X, &zeros);
        layer(&mut c, GateKind::H, &data);
        layer(&mut c, GateKind::X, &data);
        mcz(&mut c, &data, &anc);
        layer(&mut c, GateKind::X, &data);
        layer(&mut c, GateKind::H, &data);
    }
    for q in 0..k {
        c.measure(q, q);
    }
    c
}

/// Item marked by [`grover`] for the same `k` and seed.
pub fn grover_marked(k: usize, seed: u64) -> usize {
    stream_rng(seed, stream(CircuitFamily::Grover, k, 0)).random_range(0..1usize << k)
}

/// MaxCut QAOA with `instance + 1` layers on a seeded graph: a ring plus a
/// random chord from each vertex with probability 0.3.
pub fn qaoa(n: usize, instance: usize, seed: u64) -> Circuit {
    let mut rng = stream_rng(seed, stream(CircuitFamily::Qaoa, n, instance));
    let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    if n > 2 {
        edges.push((0, n - 1));
    }
    for i in 0..n {
        if n > 3 && rng.random_bool(0.3) {
            let j = rng.random_range(0..n);
            let e = (i.min(j), i.max(j));
            if i != j && !edges.contains(&e) {
                edges.push(e);
            }
        }
    }
    let mut c = Circuit::new(n, n).named(format!("qaoa_n{n}_i{instance}"));
    (0..n).for_each(|q| {
        c.apply(GateKind::H, &[q], &[]);
    });
    for _ in 0..=instance {
        let gamma: f64 = rng.random_range(0.1..PI);
        let beta: f64 = rng.random_range(0.1..PI);
        for &(a, b) in &edges {
            c.apply(GateKind::Rzz, &[a, b], &[2.0 * gamma]);
        }
        (0..n).for_each(|q| {
            c.apply(GateKind::Rx, &[q], &[2.0 * beta]);
        });
    }
    c.measure_all();
    c
}

const RANDOM_POOL: [GateKind; 18] = [
    GateKind::H,
    GateKind::X,
    GateKind::Y,
    GateKind::Z,
    GateKind::S,
    GateKind::Sdg,
    GateKind::T,
    GateKind::Tdg,
    GateKind::Sx,
    GateKind::Rx,
    GateKind::Ry,
    GateKind::Rz,
    GateKind::U3,
    GateKind::Cx,
    GateKind::Cz,
    GateKind::Cp,
    GateKind::Swap,
    GateKind::Ccx,
];

/// `n × L` gates (`L` uniform in 2..=6) drawn uniformly from a fixed pool on
/// distinct random qubits, then every qubit measured.
pub fn random_circuit(n: usize, instance: usize, seed: u64) -> Circuit {
    let mut rng = stream_rng(seed, stream(CircuitFamily::Random, n, instance));
    let layers = rng.random_range(2..=6);
    let pool: Vec<GateKind> = RANDOM_POOL
        .iter()
        .copied()
        .filter(|k| k.arity().is_some_and(|a| a <= n))
        .collect();
    let mut c = Circuit::new(n, n).named(format!("random_n{n}_i{instance}"));
    for _ in 0..n * layers {
        let kind = *pool.choose(&mut rng).expect("pool is non-empty");
        let arity = kind.arity().expect("pool gates have fixed arity");
        let qubits = rand::seq::index::sample(&mut rng, n, arity).into_vec();
        let params: Vec<f64> = (0..kind.num_params()).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        c.apply(kind, &qubits, &params);
    }
    c.measure_all();
    c
}
