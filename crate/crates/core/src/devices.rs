//! Device models: coupling graph, native gate set and calibration data.
//!
//! A [`DeviceDescriptor`] is the serializable form (defaults plus explicit
//! overrides); [`DeviceModel::from_descriptor`] validates it and fills every
//! missing calibration entry from the defaults.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::GateKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Technology {
    Superconducting,
    IonTrap,
}

impl fmt::Display for Technology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Technology::Superconducting => "superconducting",
            Technology::IonTrap => "ion-trap",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeviceError {
    #[error("device `{id}`: {message}")]
    Schema { id: String, message: String },
    #[error("device `{id}`: fidelity {value} for {what} is outside (0, 1]")]
    FidelityRange { id: String, what: String, value: f64 },
    #[error("device `{id}`: qubit {qubit} out of range for {num_qubits} qubits")]
    QubitRange {
        id: String,
        qubit: usize,
        num_qubits: usize,
    },
    #[error("device `{id}`: no fidelity for {what} and no default declared")]
    MissingCalibration { id: String, what: String },
}

/// Per-gate-class default fidelities.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Defaults {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub single_qubit: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_qubit: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateOverride {
    pub gate: GateKind,
    pub qubits: Vec<usize>,
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutOverride {
    pub qubit: usize,
    pub fidelity: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gate: Vec<GateOverride>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub readout: Vec<ReadoutOverride>,
}

/// Serializable device description. Field names are the device file format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceDescriptor {
    pub id: String,
    pub technology: Technology,
    pub num_qubits: usize,
    /// Directed pairs. May be empty for ion traps, meaning complete coupling.
    #[serde(default)]
    pub coupling: Vec<[usize; 2]>,
    pub native_gates: Vec<GateKind>,
    #[serde(default)]
    pub defaults: Defaults,
    #[serde(default, skip_serializing_if = "is_empty_overrides")]
    pub overrides: Overrides,
    /// Per-qubit coherence data (e.g. `t1`, `t2`). Accepted, not used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence: Option<BTreeMap<String, Vec<f64>>>,
}

fn is_empty_overrides(o: &Overrides) -> bool {
    o.gate.is_empty() && o.readout.is_empty()
}

/// Fidelities for every native gate on every legal qubit tuple, and for every
/// qubit's readout.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Calibration {
    /// gate kind → qubit tuple → fidelity.
    pub gate_fidelity: BTreeMap<GateKind, BTreeMap<Vec<usize>, f64>>,
    pub readout_fidelity: Vec<f64>,
}

impl Calibration {
    pub fn gate(&self, kind: GateKind, qubits: &[usize]) -> Option<f64> {
        self.gate_fidelity.get(&kind)?.get(qubits).copied()
    }

    /// All `(kind, qubits, fidelity)` entries in key order.
    pub fn entries(&self) -> impl Iterator<Item = (GateKind, &[usize], f64)> {
        self.gate_fidelity
            .iter()
            .flat_map(|(&k, sites)| sites.iter().map(move |(q, &f)| (k, q.as_slice(), f)))
    }

    pub fn readout(&self, qubit: usize) -> Option<f64> {
        self.readout_fidelity.get(qubit).copied()
    }
}

/// Validated, immutable device.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviceModel {
    pub id: String,
    pub technology: Technology,
    pub num_qubits: usize,
    pub coupling: BTreeSet<(usize, usize)>,
    pub native_gates: BTreeSet<GateKind>,
    pub calib: Calibration,
    neighbors: Vec<Vec<usize>>,
    distance: Vec<Vec<usize>>,
}

/// Distance between qubits in different components.
pub const UNREACHABLE: usize = usize::MAX;

fn check_fidelity(id: &str, what: impl Fn() -> String, value: f64) -> Result<f64, DeviceError> {
    if value > 0.0 && value <= 1.0 {
        Ok(value)
    } else {
        Err(DeviceError::FidelityRange {
            id: String::from(id),
            what: what(),
            value,
        })
    }
}

impl DeviceModel {
    pub fn from_descriptor(d: &DeviceDescriptor) -> Result<DeviceModel, DeviceError> {
        let id = d.id.as_str();
        let schema = |message: &str| DeviceError::Schema {
            id: String::from(id),
            message: String::from(message),
        };
        let range = |qubit: usize| DeviceError::QubitRange {
            id: String::from(id),
            qubit,
            num_qubits: d.num_qubits,
        };
        if d.num_qubits == 0 {
            return Err(schema("num_qubits must be positive"));
        }

        let mut coupling = BTreeSet::new();
        for &[a, b] in &d.coupling {
            for q in [a, b] {
                if q >= d.num_qubits {
                    return Err(range(q));
                }
            }
            if a == b {
                return Err(schema("coupling contains a self-loop"));
            }
            coupling.insert((a, b));
        }
        if d.technology == Technology::IonTrap {
            let complete = complete_coupling(d.num_qubits);
            if coupling.is_empty() {
                coupling = complete;
            } else if coupling != complete {
                return Err(schema("ion-trap coupling must be complete"));
            }
        }

        let native_gates: BTreeSet<GateKind> = d.native_gates.iter().copied().collect();
        if native_gates.contains(&GateKind::Barrier) {
            return Err(schema("barrier cannot be a native gate"));
        }
        if !native_gates.contains(&GateKind::Measure) {
            return Err(schema("native_gates must include measure"));
        }
        if !native_gates.iter().any(|k| k.arity() == Some(2)) {
            return Err(schema("native_gates must include a two-qubit gate"));
        }
        if let Some(k) = native_gates.iter().find(|k| k.arity() == Some(3)) {
            return Err(DeviceError::Schema {
                id: String::from(id),
                message: alloc::format!("three-qubit native gate `{k}` is not supported"),
            });
        }

        let defaults = &d.defaults;
        for (name, v) in [
            ("default single_qubit", defaults.single_qubit),
            ("default two_qubit", defaults.two_qubit),
            ("default readout", defaults.readout),
        ] {
            if let Some(v) = v {
                check_fidelity(id, || String::from(name), v)?;
            }
        }

        let mut overrides = BTreeMap::new();
        for o in &d.overrides.gate {
            let what = || alloc::format!("{} {:?}", o.gate, o.qubits);
            check_fidelity(id, what, o.fidelity)?;
            if let Some(&q) = o.qubits.iter().find(|&&q| q >= d.num_qubits) {
                return Err(range(q));
            }
            let legal = native_gates.contains(&o.gate)
                && o.gate.is_gate()
                && match *o.qubits.as_slice() {
                    [_] => o.gate.arity() == Some(1),
                    [a, b] => o.gate.arity() == Some(2) && coupling.contains(&(a, b)),
                    _ => false,
                };
            if !legal {
                return Err(DeviceError::Schema {
                    id: String::from(id),
                    message: alloc::format!("override for illegal gate site {}", what()),
                });
            }
            overrides.insert((o.gate, o.qubits.clone()), o.fidelity);
        }

        let missing = |what: String| DeviceError::MissingCalibration {
            id: String::from(id),
            what,
        };
        let mut gate_fidelity = BTreeMap::new();
        for &kind in native_gates.iter().filter(|k| k.is_gate()) {
            let sites: Vec<Vec<usize>> = if kind.arity() == Some(1) {
                (0..d.num_qubits).map(|q| vec![q]).collect()
            } else {
                coupling.iter().map(|&(a, b)| vec![a, b]).collect()
            };
            let default = if kind.arity() == Some(1) {
                defaults.single_qubit
            } else {
                defaults.two_qubit
            };
            let table: &mut BTreeMap<Vec<usize>, f64> = gate_fidelity.entry(kind).or_default();
            for site in sites {
                let f = match overrides.get(&(kind, site.clone())).copied().or(default) {
                    Some(f) => f,
                    None => return Err(missing(alloc::format!("{kind} {site:?}"))),
                };
                table.insert(site, f);
            }
        }

        let mut readout_fidelity: Vec<Option<f64>> = vec![defaults.readout; d.num_qubits];
        for o in &d.overrides.readout {
            if o.qubit >= d.num_qubits {
                return Err(range(o.qubit));
            }
            check_fidelity(id, || alloc::format!("readout of qubit {}", o.qubit), o.fidelity)?;
            readout_fidelity[o.qubit] = Some(o.fidelity);
        }
        let readout_fidelity = readout_fidelity
            .into_iter()
            .enumerate()
            .map(|(q, f)| f.ok_or_else(|| missing(alloc::format!("readout of qubit {q}"))))
            .collect::<Result<Vec<_>, _>>()?;

        let (neighbors, distance) = graph_tables(d.num_qubits, &coupling);
        Ok(DeviceModel {
            id: d.id.clone(),
            technology: d.technology,
            num_qubits: d.num_qubits,
            coupling,
            native_gates,
            calib: Calibration {
                gate_fidelity,
                readout_fidelity,
            },
            neighbors,
            distance,
        })
    }

    /// Descriptor that reproduces this model exactly. Defaults are the most
    /// common value per gate class; everything else becomes an override.
    pub fn to_descriptor(&self) -> DeviceDescriptor {
        fn mode(values: impl Iterator<Item = f64>) -> Option<f64> {
            let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
            for v in values {
                *counts.entry(v.to_bits()).or_default() += 1;
            }
            // Highest count, lowest bit pattern on ties.
            counts
                .into_iter()
                .fold(None, |best: Option<(u64, usize)>, (bits, n)| match best {
                    Some((_, m)) if m >= n => best,
                    _ => Some((bits, n)),
                })
                .map(|(bits, _)| f64::from_bits(bits))
        }
        let by_arity = |arity: usize| {
            self.calib
                .entries()
                .filter(move |(k, _, _)| k.arity() == Some(arity))
                .map(|(_, _, f)| f)
        };
        let defaults = Defaults {
            single_qubit: mode(by_arity(1)),
            two_qubit: mode(by_arity(2)),
            readout: mode(self.calib.readout_fidelity.iter().copied()),
        };
        let mut overrides = Overrides::default();
        for (kind, qubits, f) in self.calib.entries() {
            let default = if qubits.len() == 1 {
                defaults.single_qubit
            } else {
                defaults.two_qubit
            };
            if Some(f) != default {
                overrides.gate.push(GateOverride {
                    gate: kind,
                    qubits: qubits.to_vec(),
                    fidelity: f,
                });
            }
        }
        for (q, &f) in self.calib.readout_fidelity.iter().enumerate() {
            if Some(f) != defaults.readout {
                overrides.readout.push(ReadoutOverride { qubit: q, fidelity: f });
            }
        }
        DeviceDescriptor {
            id: self.id.clone(),
            technology: self.technology,
            num_qubits: self.num_qubits,
            coupling: self.coupling.iter().map(|&(a, b)| [a, b]).collect(),
            native_gates: self.native_gates.iter().copied().collect(),
            defaults,
            overrides,
            coherence: None,
        }
    }

    pub fn is_coupled(&self, a: usize, b: usize) -> bool {
        self.coupling.contains(&(a, b))
    }

    /// Undirected neighbors of `q`, ascending.
    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.neighbors[q]
    }

    /// Hop distance in the undirected coupling graph, or [`UNREACHABLE`].
    pub fn distance(&self, a: usize, b: usize) -> usize {
        self.distance[a][b]
    }

    pub fn is_native(&self, kind: GateKind) -> bool {
        self.native_gates.contains(&kind)
    }

    pub fn is_connected(&self) -> bool {
        self.distance[0].iter().all(|&d| d != UNREACHABLE)
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }
}

fn complete_coupling(n: usize) -> BTreeSet<(usize, usize)> {
    (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect()
}

fn graph_tables(n: usize, coupling: &BTreeSet<(usize, usize)>) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let mut sets = vec![BTreeSet::new(); n];
    for &(a, b) in coupling {
        sets[a].insert(b);
        sets[b].insert(a);
    }
    let neighbors: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
    let distance = (0..n)
        .map(|src| {
            let mut dist = vec![UNREACHABLE; n];
            dist[src] = 0;
            let mut queue = VecDeque::from([src]);
            while let Some(u) = queue.pop_front() {
                for &v in &neighbors[u] {
                    if dist[v] == UNREACHABLE {
                        dist[v] = dist[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            dist
        })
        .collect();
    (neighbors, distance)
}

pub const SC_SINGLE_QUBIT: f64 = 0.999;
pub const SC_TWO_QUBIT: f64 = 0.99;
pub const SC_TWO_QUBIT_JITTER: f64 = 0.005;
pub const SC_READOUT: f64 = 0.97;
pub const ION_SINGLE_QUBIT: f64 = 0.9995;
pub const ION_TWO_QUBIT: f64 = 0.973;
pub const ION_READOUT: f64 = 0.996;
const JITTER_SEED: u64 = 0x5eed_ca11;

pub const SC_NATIVES: [GateKind; 5] = [
    GateKind::Rz,
    GateKind::Sx,
    GateKind::X,
    GateKind::Cx,
    GateKind::Measure,
];
pub const ION_NATIVES: [GateKind; 5] = [
    GateKind::Rx,
    GateKind::Ry,
    GateKind::Rz,
    GateKind::Rxx,
    GateKind::Measure,
];

/// Undirected ring on `n` qubits.
pub fn ring_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|i| (i.min((i + 1) % n), i.max((i + 1) % n))).collect()
}

/// 27-qubit heavy-hex (Falcon) coupling.
pub fn falcon27_edges() -> Vec<(usize, usize)> {
    vec![
        (0, 1), (1, 2), (1, 4), (2, 3), (3, 5), (4, 7), (5, 8), (6, 7), (7, 10),
        (8, 9), (8, 11), (10, 12), (11, 14), (12, 13), (12, 15), (13, 14), (14, 16),
        (15, 18), (16, 19), (17, 18), (18, 21), (19, 20), (19, 22), (21, 23), (22, 25),
        (23, 24), (24, 25), (25, 26),
    ]
}

/// 127-qubit heavy-hex (Eagle) coupling: seven qubit rows joined by groups of
/// four bridge qubits, numbered row by row with each bridge group between its
/// two rows.
pub fn eagle127_edges() -> Vec<(usize, usize)> {
    // (first column, last column) of each row.
    const ROWS: [(usize, usize); 7] = [(0, 13), (0, 14), (0, 14), (0, 14), (0, 14), (0, 14), (1, 14)];
    let mut edges = Vec::new();
    let mut row_start = Vec::new();
    let mut next = 0;
    let mut bridge_start = Vec::new();
    for (r, &(lo, hi)) in ROWS.iter().enumerate() {
        row_start.push(next);
        for q in next..next + (hi - lo) {
            edges.push((q, q + 1));
        }
        next += hi - lo + 1;
        if r + 1 < ROWS.len() {
            bridge_start.push(next);
            next += 4;
        }
    }
    let qubit_at = |row: usize, col: usize| row_start[row] + col - ROWS[row].0;
    for (gap, &b0) in bridge_start.iter().enumerate() {
        let offset = if gap % 2 == 0 { 0 } else { 2 };
        for k in 0..4 {
            let col = offset + 4 * k;
            edges.push((qubit_at(gap, col), b0 + k));
            edges.push((b0 + k, qubit_at(gap + 1, col)));
        }
    }
    edges.sort_unstable();
    edges
}

/// Edges of `edges` with both endpoints below `n`.
pub fn induced_prefix(edges: &[(usize, usize)], n: usize) -> Vec<(usize, usize)> {
    edges.iter().copied().filter(|&(a, b)| a < n && b < n).collect()
}

fn superconducting(id: &str, n: usize, edges: Vec<(usize, usize)>, stream: u64) -> DeviceModel {
    let mut undirected: Vec<(usize, usize)> = edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
    undirected.sort_unstable();
    undirected.dedup();

    let mut rng = ChaCha8Rng::seed_from_u64(JITTER_SEED);
    rng.set_stream(stream);
    let mut gate = Vec::new();
    let mut coupling = Vec::new();
    for &(a, b) in &undirected {
        let f = SC_TWO_QUBIT + rng.random_range(-SC_TWO_QUBIT_JITTER..=SC_TWO_QUBIT_JITTER);
        for (x, y) in [(a, b), (b, a)] {
            coupling.push([x, y]);
            gate.push(GateOverride {
                gate: GateKind::Cx,
                qubits: vec![x, y],
                fidelity: f,
            });
        }
    }
    let d = DeviceDescriptor {
        id: String::from(id),
        technology: Technology::Superconducting,
        num_qubits: n,
        coupling,
        native_gates: SC_NATIVES.to_vec(),
        defaults: Defaults {
            single_qubit: Some(SC_SINGLE_QUBIT),
            two_qubit: Some(SC_TWO_QUBIT),
            readout: Some(SC_READOUT),
        },
        overrides: Overrides {
            gate,
            readout: Vec::new(),
        },
        coherence: None,
    };
    DeviceModel::from_descriptor(&d).expect("built-in device is valid")
}

fn ion_trap(id: &str, n: usize) -> DeviceModel {
    let d = DeviceDescriptor {
        id: String::from(id),
        technology: Technology::IonTrap,
        num_qubits: n,
        coupling: Vec::new(),
        native_gates: ION_NATIVES.to_vec(),
        defaults: Defaults {
            single_qubit: Some(ION_SINGLE_QUBIT),
            two_qubit: Some(ION_TWO_QUBIT),
            readout: Some(ION_READOUT),
        },
        overrides: Overrides::default(),
        coherence: None,
    };
    DeviceModel::from_descriptor(&d).expect("built-in device is valid")
}

/// The five built-in devices in ascending qubit count.
pub fn builtin_devices() -> Vec<DeviceModel> {
    let eagle = eagle127_edges();
    vec![
        superconducting("dev8", 8, ring_edges(8), 8),
        ion_trap("dev11", 11),
        superconducting("dev27", 27, falcon27_edges(), 27),
        superconducting("dev80", 80, induced_prefix(&eagle, 80), 80),
        superconducting("dev127", 127, eagle, 127),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ion_descriptor() -> DeviceDescriptor {
        DeviceDescriptor {
            id: "ion".into(),
            technology: Technology::IonTrap,
            num_qubits: 11,
            coupling: Vec::new(),
            native_gates: ION_NATIVES.to_vec(),
            defaults: Defaults {
                single_qubit: Some(0.999),
                two_qubit: Some(0.97),
                readout: Some(0.99),
            },
            overrides: Overrides::default(),
            coherence: None,
        }
    }

    #[test]
    fn ion_trap_file_gets_complete_coupling() {
        let d = DeviceModel::from_descriptor(&ion_descriptor()).unwrap();
        // n(n-1) directed pairs, enumerated independently.
        let mut pairs = 0;
        for a in 0..11 {
            for b in 0..11 {
                if a != b {
                    assert!(d.is_coupled(a, b));
                    pairs += 1;
                }
            }
        }
        assert_eq!(d.coupling.len(), pairs);
        assert_eq!(pairs, 110);
        assert_eq!(d.calib.gate(GateKind::Rxx, &[3, 7]), Some(0.97));
    }

    #[test]
    fn out_of_range_fidelity_rejected() {
        let mut bad = ion_descriptor();
        bad.defaults.two_qubit = Some(1.3);
        assert!(matches!(
            DeviceModel::from_descriptor(&bad),
            Err(DeviceError::FidelityRange { .. })
        ));
        let mut zero = ion_descriptor();
        zero.overrides.readout.push(ReadoutOverride { qubit: 0, fidelity: 0.0 });
        assert!(DeviceModel::from_descriptor(&zero).is_err());
    }

    #[test]
    fn readout_default_fill() {
        let d = DeviceDescriptor {
            id: "sc".into(),
            technology: Technology::Superconducting,
            num_qubits: 8,
            coupling: ring_edges(8).into_iter().flat_map(|(a, b)| [[a, b], [b, a]]).collect(),
            native_gates: SC_NATIVES.to_vec(),
            defaults: Defaults {
                single_qubit: Some(0.999),
                two_qubit: Some(0.99),
                readout: Some(0.95),
            },
            overrides: Overrides::default(),
            coherence: None,
        };
        let m = DeviceModel::from_descriptor(&d).unwrap();
        assert_eq!(m.calib.readout_fidelity, vec![0.95; 8]);
    }

    #[test]
    fn schema_errors() {
        let mut d = ion_descriptor();
        d.defaults.readout = None;
        assert!(matches!(
            DeviceModel::from_descriptor(&d),
            Err(DeviceError::MissingCalibration { .. })
        ));
        let mut d = ion_descriptor();
        d.coupling = vec![[0, 11]];
        assert!(matches!(DeviceModel::from_descriptor(&d), Err(DeviceError::QubitRange { .. })));
        let mut d = ion_descriptor();
        d.coupling = vec![[0, 1]];
        assert!(matches!(DeviceModel::from_descriptor(&d), Err(DeviceError::Schema { .. })));
        let mut d = ion_descriptor();
        d.native_gates = vec![GateKind::Rx, GateKind::Measure];
        assert!(DeviceModel::from_descriptor(&d).is_err());
        let mut d = ion_descriptor();
        d.native_gates.retain(|&k| k != GateKind::Measure);
        assert!(DeviceModel::from_descriptor(&d).is_err());
    }

    #[test]
    fn builtin_fleet_shape() {
        let fleet = builtin_devices();
        assert_eq!(fleet.len(), 5);
        let sizes: Vec<usize> = fleet.iter().map(|d| d.num_qubits).collect();
        assert_eq!(sizes, vec![8, 11, 27, 80, 127]);
        let ion = &fleet[1];
        assert_eq!(ion.technology, Technology::IonTrap);
        assert!((0..11).all(|q| ion.neighbors(q).len() == 10));
        for d in fleet.iter().filter(|d| d.technology == Technology::Superconducting) {
            assert!(d.max_degree() <= 3, "{}", d.id);
            assert!(bfs_reaches_all(d), "{}", d.id);
            for &(a, b) in &d.coupling {
                assert!(d.is_coupled(b, a));
                assert_eq!(d.calib.gate(GateKind::Cx, &[a, b]), d.calib.gate(GateKind::Cx, &[b, a]));
                let f = d.calib.gate(GateKind::Cx, &[a, b]).unwrap();
                assert!((f - SC_TWO_QUBIT).abs() <= SC_TWO_QUBIT_JITTER + 1e-15);
            }
        }
    }

    // Independent reachability check over the raw coupling set.
    fn bfs_reaches_all(d: &DeviceModel) -> bool {
        let mut seen = vec![false; d.num_qubits];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &(a, b) in &d.coupling {
                if a == u && !seen[b] {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    #[test]
    fn eagle_layout() {
        let e = eagle127_edges();
        assert_eq!(e.len(), 144);
        assert!(e.contains(&(0, 14)) && e.contains(&(14, 18)));
        assert!(e.contains(&(20, 33)) && e.contains(&(33, 39)));
        assert!(e.contains(&(112, 126)) && e.contains(&(108, 112)));
        assert!(!e.contains(&(13, 12)) && e.contains(&(12, 13)));
        assert_eq!(falcon27_edges().len(), 28);
    }

    #[test]
    fn descriptor_round_trip() {
        for d in builtin_devices() {
            let back = DeviceModel::from_descriptor(&d.to_descriptor()).unwrap();
            assert_eq!(back, d);
        }
    }

    #[test]
    fn distances() {
        let ring = &builtin_devices()[0];
        assert_eq!(ring.distance(0, 4), 4);
        assert_eq!(ring.distance(0, 6), 2);
        assert_eq!(ring.neighbors(0), &[1, 7]);
    }
}
