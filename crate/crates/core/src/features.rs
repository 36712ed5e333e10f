//! Circuit feature vectors: qubit count, depth, per-gate-kind counts and five
//! composite metrics (program communication, critical depth, entanglement
//! ratio, parallelism, liveness).
//!
//! Composite metrics are computed as exact rationals and converted to `f64`
//! at the end. Degenerate circuits (no qubits, no layers, a single qubit where
//! pairs are needed) map to 0.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, GateKind};
use crate::dag::{circuit_depth, interaction_graph, on_critical_path};

pub const COMPOSITE_FEATURES: [&str; 5] = [
    "program_communication",
    "critical_depth",
    "entanglement_ratio",
    "parallelism",
    "liveness",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeatureError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("row {row} has {found} values, schema has {expected}")]
    RaggedDataset {
        row: usize,
        expected: usize,
        found: usize,
    },
}

/// Non-negative rational with `den > 0`, or the zero convention `0/1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub const ZERO: Ratio = Ratio { num: 0, den: 1 };

    fn new(num: u64, den: u64) -> Ratio {
        if den == 0 {
            Ratio::ZERO
        } else {
            Ratio { num, den }
        }
    }

    /// Exact equality with `num/den` by cross-multiplication.
    pub fn equals(self, num: u64, den: u64) -> bool {
        u128::from(self.num) * u128::from(den) == u128::from(num) * u128::from(self.den)
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Σ deg(q) / (n(n−1)) over the interaction graph.
pub fn program_communication_ratio(c: &Circuit) -> Ratio {
    let n = c.num_qubits as u64;
    if n < 2 {
        return Ratio::ZERO;
    }
    let degree_sum = 2 * interaction_graph(c).edges.len() as u64;
    Ratio::new(degree_sum, n * (n - 1))
}

/// Multi-qubit gates on some longest path over all multi-qubit gates.
pub fn critical_depth_ratio(c: &Circuit) -> Ratio {
    let critical = on_critical_path(c);
    let (mut on_path, mut total) = (0u64, 0u64);
    for (op, crit) in c.ops.iter().zip(critical) {
        if op.kind.is_multi_qubit() {
            total += 1;
            on_path += u64::from(crit);
        }
    }
    Ratio::new(on_path, total)
}

/// Multi-qubit gates over all gates (measurements and barriers excluded).
pub fn entanglement_ratio_ratio(c: &Circuit) -> Ratio {
    let multi = c.ops.iter().filter(|op| op.kind.is_multi_qubit()).count() as u64;
    Ratio::new(multi, c.gate_count() as u64)
}

/// `clamp((n_g/d − 1)/(n − 1), 0, 1)`, i.e. `(n_g − d) / (d (n − 1))`.
pub fn parallelism_ratio(c: &Circuit) -> Ratio {
    let n = c.num_qubits as u64;
    let d = circuit_depth(c).depth as u64;
    let gates = c.gate_count() as u64;
    if n < 2 || d == 0 || gates <= d {
        return Ratio::ZERO;
    }
    let r = Ratio::new(gates - d, d * (n - 1));
    if r.num > r.den {
        Ratio { num: 1, den: 1 }
    } else {
        r
    }
}

/// Active qubit-layer cells over `n·d`. Measurements are activity, barriers
/// are not.
pub fn liveness_ratio(c: &Circuit) -> Ratio {
    let n = c.num_qubits as u64;
    let d = circuit_depth(c).depth as u64;
    if n == 0 || d == 0 {
        return Ratio::ZERO;
    }
    // Instructions sharing a qubit sit in distinct layers, so each operand is
    // exactly one active cell.
    let active: u64 = c
        .ops
        .iter()
        .filter(|op| op.kind != GateKind::Barrier)
        .map(|op| op.qubits.len() as u64)
        .sum();
    Ratio::new(active, n * d)
}

pub fn program_communication(c: &Circuit) -> f64 {
    program_communication_ratio(c).value()
}

pub fn critical_depth(c: &Circuit) -> f64 {
    critical_depth_ratio(c).value()
}

pub fn entanglement_ratio(c: &Circuit) -> f64 {
    entanglement_ratio_ratio(c).value()
}

pub fn parallelism(c: &Circuit) -> f64 {
    parallelism_ratio(c).value()
}

pub fn liveness(c: &Circuit) -> f64 {
    liveness_ratio(c).value()
}

fn count_name(kind: GateKind) -> String {
    format!("count_{}", kind.name())
}

/// Ordered feature names plus the names dropped by pruning.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub names: Vec<String>,
    #[serde(default)]
    pub pruned: Vec<String>,
}

impl FeatureSchema {
    /// Every feature this module knows, in canonical order.
    pub fn full() -> FeatureSchema {
        let mut names = vec![String::from("num_qubits"), String::from("depth")];
        names.extend(GateKind::countable().map(count_name));
        names.extend(COMPOSITE_FEATURES.iter().map(|s| String::from(*s)));
        FeatureSchema {
            names,
            pruned: Vec::new(),
        }
    }

    /// Schema over a subset of known names, kept in the given order.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<FeatureSchema, FeatureError> {
        let full = FeatureSchema::full();
        let names: Vec<String> = names.iter().map(|s| String::from(s.as_ref())).collect();
        if let Some(bad) = names.iter().find(|n| !full.names.contains(n)) {
            return Err(FeatureError::UnknownFeature(bad.clone()));
        }
        Ok(FeatureSchema {
            names,
            pruned: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Re-expresses `v` (over any schema) in this schema's order.
    pub fn project(&self, v: &FeatureVector) -> Result<FeatureVector, FeatureError> {
        let values = self
            .names
            .iter()
            .map(|name| {
                v.get(name)
                    .ok_or_else(|| FeatureError::UnknownFeature(name.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FeatureVector {
            values,
            names: Arc::from(self.names.clone()),
        })
    }
}

/// Feature values paired with their names.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub names: Arc<[String]>,
}

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Populates every feature of `schema` for `c`.
pub fn extract_features(c: &Circuit, schema: &FeatureSchema) -> FeatureVector {
    let mut counts = vec![0usize; GateKind::ALL.len()];
    for op in &c.ops {
        counts[op.kind as usize] += 1;
    }
    let depth = circuit_depth(c).depth;
    let values = schema
        .names
        .iter()
        .map(|name| match name.as_str() {
            "num_qubits" => c.num_qubits as f64,
            "depth" => depth as f64,
            "program_communication" => program_communication(c),
            "critical_depth" => critical_depth(c),
            "entanglement_ratio" => entanglement_ratio(c),
            "parallelism" => parallelism(c),
            "liveness" => liveness(c),
            other => other
                .strip_prefix("count_")
                .and_then(|g| g.parse::<GateKind>().ok())
                .filter(|k| k.is_gate())
                .map_or(0.0, |k| counts[k as usize] as f64),
        })
        .collect();
    FeatureVector {
        values,
        names: Arc::from(schema.names.clone()),
    }
}

/// Drops columns that are zero for every sample. The input vectors must share
/// one schema.
pub fn prune_constant_features(dataset: &[FeatureVector]) -> Result<FeatureSchema, FeatureError> {
    let first = dataset.first().ok_or(FeatureError::EmptyDataset)?;
    let width = first.names.len();
    for (row, v) in dataset.iter().enumerate() {
        if v.values.len() != width {
            return Err(FeatureError::RaggedDataset {
                row,
                expected: width,
                found: v.values.len(),
            });
        }
    }
    let (mut names, mut pruned) = (Vec::new(), Vec::new());
    for (j, name) in first.names.iter().enumerate() {
        if dataset.iter().all(|v| v.values[j] == 0.0) {
            pruned.push(name.clone());
        } else {
            names.push(name.clone());
        }
    }
    Ok(FeatureSchema { names, pruned })
}

/// Per-column z-score parameters. Zero-variance columns pass through as-is.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Standardizer, FeatureError> {
        let first = rows.first().ok_or(FeatureError::EmptyDataset)?;
        let width = first.len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; width];
        for (row, r) in rows.iter().enumerate() {
            if r.len() != width {
                return Err(FeatureError::RaggedDataset {
                    row,
                    expected: width,
                    found: r.len(),
                });
            }
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut std = vec![0.0; width];
        for r in rows {
            for ((s, x), m) in std.iter_mut().zip(r).zip(&mean) {
                *s += (x - m) * (x - m);
            }
        }
        std.iter_mut().for_each(|s| *s = libm::sqrt(*s / n));
        Ok(Standardizer { mean, std })
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&x, (&m, &s))| if s > 0.0 { (x - m) / s } else { x })
            .collect()
    }

    pub fn transform_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }
}

/// Fits a [`Standardizer`] and applies it to the same rows.
pub fn standardize(rows: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Standardizer), FeatureError> {
    let s = Standardizer::fit(rows)?;
    Ok((s.transform_all(rows), s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ghz3() -> Circuit {
        let mut c = Circuit::new(3, 3);
        c.apply(GateKind::H, &[0], &[])
            .apply(GateKind::Cx, &[0, 1], &[])
            .apply(GateKind::Cx, &[1, 2], &[])
            .measure_all();
        c
    }

    #[test]
    fn ghz_feature_values() {
        let v = extract_features(&ghz3(), &FeatureSchema::full());
        assert_eq!(v.get("num_qubits"), Some(3.0));
        assert_eq!(v.get("depth"), Some(4.0));
        assert_eq!(v.get("count_h"), Some(1.0));
        assert_eq!(v.get("count_cx"), Some(2.0));
        assert_eq!(v.get("count_rz"), Some(0.0));
        assert!(program_communication_ratio(&ghz3()).equals(4, 6));
        assert!(critical_depth_ratio(&ghz3()).equals(1, 1));
        assert!(entanglement_ratio_ratio(&ghz3()).equals(2, 3));
        // n_g = 3 < d = 4: clamps to 0.
        assert_eq!(parallelism(&ghz3()), 0.0);
        // 1 + 2 + 2 gate operands + 3 measurements over 3 x 4 cells.
        assert!(liveness_ratio(&ghz3()).equals(8, 12));
    }

    #[test]
    fn empty_circuit_is_all_zero_except_width() {
        let v = extract_features(&Circuit::new(1, 0), &FeatureSchema::full());
        assert_eq!(v.get("num_qubits"), Some(1.0));
        assert!(v.values[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn composite_edge_values() {
        // Complete interaction on 4 qubits.
        let mut full = Circuit::new(4, 0);
        for a in 0..4 {
            for b in a + 1..4 {
                full.apply(GateKind::Cz, &[a, b], &[]);
            }
        }
        assert_eq!(program_communication(&full), 1.0);
        assert_eq!(entanglement_ratio(&full), 1.0);

        let mut hs = Circuit::new(2, 0);
        hs.apply(GateKind::H, &[0], &[]).apply(GateKind::H, &[1], &[]);
        assert_eq!(program_communication(&hs), 0.0);
        assert_eq!(entanglement_ratio(&hs), 0.0);
        assert_eq!(critical_depth(&hs), 0.0);
        assert_eq!(parallelism(&hs), 1.0);
        assert_eq!(liveness(&hs), 1.0);

        let mut one = Circuit::new(2, 0);
        one.apply(GateKind::H, &[0], &[]);
        assert_eq!(liveness(&one), 0.5);

        let mut line = Circuit::new(2, 0);
        line.apply(GateKind::H, &[0], &[]).apply(GateKind::X, &[0], &[]);
        assert_eq!(parallelism(&line), 0.0);
    }

    #[test]
    fn critical_depth_counts_only_gates_on_longest_path() {
        // cx(0,1) then a long chain on qubit 2/3 that ends with cx(2,3).
        let mut c = Circuit::new(4, 0);
        c.apply(GateKind::Cx, &[0, 1], &[]);
        for _ in 0..3 {
            c.apply(GateKind::H, &[2], &[]);
        }
        c.apply(GateKind::Cx, &[2, 3], &[]);
        assert!(critical_depth_ratio(&c).equals(1, 2));
    }

    #[test]
    fn prune_drops_all_zero_columns() {
        let schema = FeatureSchema::full();
        let data = [extract_features(&ghz3(), &schema), extract_features(&Circuit::new(1, 0), &schema)];
        let pruned = prune_constant_features(&data).unwrap();
        assert_eq!(pruned.len() + pruned.pruned.len(), schema.len());
        assert!(pruned.names.contains(&"count_cx".into()));
        assert!(pruned.pruned.contains(&"count_rz".into()));
        let order: Vec<usize> = pruned.names.iter().map(|n| schema.index_of(n).unwrap()).collect();
        assert!(order.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(prune_constant_features(&[]), Err(FeatureError::EmptyDataset));
    }

    #[test]
    fn prune_keeps_nonzero_columns() {
        let schema = FeatureSchema::from_names(&["num_qubits", "depth"]).unwrap();
        let data = [extract_features(&ghz3(), &schema)];
        assert_eq!(prune_constant_features(&data).unwrap().names, schema.names);
    }

    #[test]
    fn empty_circuits_keep_width_column() {
        let data = [
            extract_features(&Circuit::new(2, 0), &FeatureSchema::full()),
            extract_features(&Circuit::new(3, 0), &FeatureSchema::full()),
        ];
        assert_eq!(prune_constant_features(&data).unwrap().names, vec![String::from("num_qubits")]);
    }

    #[test]
    fn z_scores() {
        let (t, s) = standardize(&[vec![1.0, 5.0], vec![3.0, 5.0]]).unwrap();
        assert_eq!(t, vec![vec![-1.0, 5.0], vec![1.0, 5.0]]);
        assert_eq!(s.mean, vec![2.0, 5.0]);
        assert_eq!(s.std, vec![1.0, 0.0]);
        assert_eq!(s.transform_all(&[vec![1.0, 5.0], vec![3.0, 5.0]]), t);
        assert!(standardize(&[]).is_err());
    }

    #[test]
    fn projection_follows_target_order() {
        let v = extract_features(&ghz3(), &FeatureSchema::full());
        let s = FeatureSchema::from_names(&["count_cx", "num_qubits"]).unwrap();
        assert_eq!(s.project(&v).unwrap().values, vec![2.0, 3.0]);
        assert!(FeatureSchema::from_names(&["bogus"]).is_err());
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::testgen;
    use proptest::prelude::*;

    fn composites(c: &Circuit) -> [Ratio; 5] {
        [
            program_communication_ratio(c),
            critical_depth_ratio(c),
            entanglement_ratio_ratio(c),
            parallelism_ratio(c),
            liveness_ratio(c),
        ]
    }

    fn permuted() -> impl Strategy<Value = (Circuit, Vec<usize>)> {
        testgen::circuit(1..=7, 30).prop_flat_map(|c| {
            let n = c.num_qubits;
            (Just(c), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
        })
    }

    proptest! {
        #[test]
        fn composites_in_unit_interval(c in testgen::circuit(1..=8, 40)) {
            for r in composites(&c) {
                prop_assert!(r.num <= r.den, "{r:?}");
            }
        }

        #[test]
        fn composites_ignore_qubit_labels((c, perm) in permuted()) {
            let p = c.remapped(c.num_qubits, |q| perm[q]);
            for (a, b) in composites(&c).into_iter().zip(composites(&p)) {
                prop_assert!(a.equals(b.num, b.den), "{a:?} vs {b:?}");
            }
        }

        #[test]
        fn entanglement_ratio_one_iff_all_multi_qubit(c in testgen::circuit(2..=6, 20)) {
            let gates: Vec<_> = c.ops.iter().filter(|o| o.kind.is_gate()).collect();
            prop_assume!(!gates.is_empty());
            let all_multi = gates.iter().all(|o| o.kind.is_multi_qubit());
            prop_assert_eq!(entanglement_ratio_ratio(&c).equals(1, 1), all_multi);
        }

        #[test]
        fn communication_one_iff_complete(c in testgen::circuit(2..=5, 25)) {
            let n = c.num_qubits;
            let complete = interaction_graph(&c).edge_set().len() == n * (n - 1) / 2;
            prop_assert_eq!(program_communication_ratio(&c).equals(1, 1), complete);
        }

        #[test]
        fn extraction_is_deterministic(c in testgen::circuit(1..=6, 30)) {
            let s = FeatureSchema::full();
            let (a, b) = (extract_features(&c, &s), extract_features(&c.clone(), &s));
            let bits = |v: &FeatureVector| v.values.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&a), bits(&b));
        }
    }
}
