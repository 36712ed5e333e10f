//! Device files: one TOML document per device.
//!
//! ```toml
//! id = "dev8"
//! technology = "superconducting"   # or "ion-trap"
//! num_qubits = 8
//! coupling = [[0, 1], [1, 0]]      # directed pairs; empty on an ion trap means all-to-all
//! native_gates = ["rz", "sx", "x", "cx", "measure"]
//!
//! [defaults]
//! single_qubit = 0.999
//! two_qubit = 0.99
//! readout = 0.97
//!
//! [[overrides.gate]]
//! gate = "cx"
//! qubits = [0, 1]
//! fidelity = 0.987
//!
//! [[overrides.readout]]
//! qubit = 3
//! fidelity = 0.95
//! ```
//!
//! An optional `[coherence]` table of per-qubit arrays is accepted and ignored.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use qpredict_core::devices::{DeviceDescriptor, DeviceError, DeviceModel};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DeviceFileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Syntax {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("{path}: {source}")]
    Invalid {
        path: PathBuf,
        source: DeviceError,
    },
    #[error("device id `{0}` appears in more than one file")]
    Duplicate(String),
    #[error("{0}: no device files (*.toml)")]
    EmptyDir(PathBuf),
}

/// Parses and validates one device document. `origin` only labels errors.
pub fn parse_device(text: &str, origin: &Path) -> Result<DeviceModel, DeviceFileError> {
    let desc: DeviceDescriptor = toml::from_str(text).map_err(|source| DeviceFileError::Syntax {
        path: origin.to_path_buf(),
        source,
    })?;
    DeviceModel::from_descriptor(&desc).map_err(|source| DeviceFileError::Invalid {
        path: origin.to_path_buf(),
        source,
    })
}

pub fn device_to_toml(d: &DeviceModel) -> String {
    toml::to_string(&d.to_descriptor()).expect("descriptors always serialize")
}

pub fn load_device(path: &Path) -> Result<DeviceModel, DeviceFileError> {
    let text = fs::read_to_string(path).map_err(|source| DeviceFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_device(&text, path)
}

/// Every `*.toml` in `dir`, ordered by qubit count and then id so that a
/// directory holding the built-in fleet enumerates options like the fleet.
pub fn load_device_dir(dir: &Path) -> Result<Vec<DeviceModel>, DeviceFileError> {
    let io = |source| DeviceFileError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.extension().is_some_and(|e| e == "toml") {
            paths.push(path);
        }
    }
    if paths.is_empty() {
        return Err(DeviceFileError::EmptyDir(dir.to_path_buf()));
    }
    paths.sort();
    let mut devices = paths.iter().map(|p| load_device(p)).collect::<Result<Vec<_>, _>>()?;
    let mut seen = BTreeSet::new();
    for d in &devices {
        if !seen.insert(d.id.clone()) {
            return Err(DeviceFileError::Duplicate(d.id.clone()));
        }
    }
    devices.sort_by(|a, b| (a.num_qubits, &a.id).cmp(&(b.num_qubits, &b.id)));
    Ok(devices)
}

/// Writes `<id>.toml` for each device.
pub fn write_device_dir(dir: &Path, devices: &[DeviceModel]) -> Result<(), DeviceFileError> {
    fs::create_dir_all(dir).map_err(|source| DeviceFileError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for d in devices {
        let path = dir.join(format!("{}.toml", d.id));
        fs::write(&path, device_to_toml(d)).map_err(|source| DeviceFileError::Io { path, source })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use qpredict_core::devices::builtin_devices;

    #[test]
    fn builtin_fleet_round_trips() {
        for d in builtin_devices() {
            let text = device_to_toml(&d);
            let back = parse_device(&text, Path::new("mem")).unwrap();
            assert_eq!(back.to_descriptor(), d.to_descriptor(), "{}", d.id);
            assert_eq!(back.calib, d.calib, "{}", d.id);
        }
    }

    #[test]
    fn directory_order_matches_fleet() {
        let dir = tempfile::tempdir().unwrap();
        let fleet = builtin_devices();
        write_device_dir(dir.path(), &fleet).unwrap();
        let loaded = load_device_dir(dir.path()).unwrap();
        let ids: Vec<_> = loaded.iter().map(|d| d.id.as_str()).collect();
        let want: Vec<_> = fleet.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, want);
    }

    #[test]
    fn fills_defaults_and_applies_overrides() {
        let text = r#"
            id = "tiny"
            technology = "superconducting"
            num_qubits = 2
            coupling = [[0, 1], [1, 0]]
            native_gates = ["rz", "sx", "x", "cx", "measure"]
            [defaults]
            single_qubit = 0.999
            two_qubit = 0.99
            readout = 0.97
            [[overrides.gate]]
            gate = "cx"
            qubits = [0, 1]
            fidelity = 0.95
        "#;
        let d = parse_device(text, Path::new("tiny.toml")).unwrap();
        use qpredict_core::circuit::GateKind;
        assert_eq!(d.calib.gate(GateKind::Cx, &[0, 1]), Some(0.95));
        assert_eq!(d.calib.gate(GateKind::Cx, &[1, 0]), Some(0.99));
        assert_eq!(d.calib.readout(1), Some(0.97));
    }

    #[test]
    fn rejects_bad_documents() {
        let base = |extra: &str| {
            format!(
                "id = \"bad\"\ntechnology = \"superconducting\"\nnum_qubits = 2\n{extra}\n\
                 native_gates = [\"rz\", \"sx\", \"cx\"]\n[defaults]\nsingle_qubit = 0.99\ntwo_qubit = 0.9\nreadout = 0.9\n"
            )
        };
        let p = Path::new("bad.toml");
        assert!(matches!(
            parse_device(&base("coupling = [[0, 5]]"), p),
            Err(DeviceFileError::Invalid { .. })
        ));
        assert!(matches!(
            parse_device(&base("coupling = [[0, 1]]\ncolour = 3"), p),
            Err(DeviceFileError::Syntax { .. })
        ));
        let out_of_range = base("coupling = [[0, 1]]").replace("two_qubit = 0.9", "two_qubit = 1.5");
        assert!(matches!(parse_device(&out_of_range, p), Err(DeviceFileError::Invalid { .. })));
        assert!(matches!(parse_device("id = ", p), Err(DeviceFileError::Syntax { .. })));
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let d = &builtin_devices()[0];
        fs::write(dir.path().join("a.toml"), device_to_toml(d)).unwrap();
        fs::write(dir.path().join("b.toml"), device_to_toml(d)).unwrap();
        assert!(matches!(load_device_dir(dir.path()), Err(DeviceFileError::Duplicate(_))));
    }
}
