//! On-disk corpus and the CSV datasets.
//!
//! A data directory holds `circuits/*.qasm` plus `manifest.csv`
//! (`file,circuit,num_qubits,sha256`), then after labeling `features.csv`
//! (`circuit`, one column per feature, `label`) and `labels.csv` (`circuit`,
//! `num_qubits`, `label`, then one column per option id holding the natural
//! log of its score, `-inf` when infeasible). Log scores are stored because
//! they are what the ranking is computed from, so a dataset reloads into the
//! exact same rankings. Floats are written in shortest round-trip form.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use qpredict_core::circuit::Circuit;
use qpredict_core::compiler::{CompilationOption, CompileError};
use qpredict_core::eval::{DotRow, HistogramBin, LabeledSample};
use qpredict_core::features::{FeatureError, FeatureSchema, FeatureVector};
use qpredict_core::ml::ImportanceReport;
use qpredict_core::qasm::{emit_qasm, parse_qasm, QasmError};
use qpredict_core::scoring::{rank_scores, EvalScore, OptionRanking, ScoreError};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const MANIFEST: &str = "manifest.csv";
pub const CIRCUITS_DIR: &str = "circuits";
pub const FEATURES_CSV: &str = "features.csv";
pub const LABELS_CSV: &str = "labels.csv";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Qasm { path: PathBuf, source: QasmError },
    #[error("{path}: content hash does not match the manifest")]
    HashMismatch { path: PathBuf },
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Option(#[from] CompileError),
    #[error(transparent)]
    Score(#[from] ScoreError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> DatasetError + '_ {
    move |source| DatasetError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn malformed(path: &Path, message: impl Into<String>) -> DatasetError {
    DatasetError::Malformed {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// One manifest row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub file: String,
    pub circuit: String,
    pub num_qubits: usize,
    pub sha256: String,
}

/// Writes every circuit as `circuits/<name>.qasm` and returns the SHA-256 of
/// the manifest, which identifies the corpus.
pub fn write_corpus(dir: &Path, circuits: &[Circuit]) -> Result<String, DatasetError> {
    let cdir = dir.join(CIRCUITS_DIR);
    fs::create_dir_all(&cdir).map_err(io_err(&cdir))?;
    let mut manifest = String::from("file,circuit,num_qubits,sha256\n");
    for c in circuits {
        if c.name.is_empty() || c.name.contains(['/', '\\', ',', '"']) {
            return Err(malformed(&cdir, format!("unusable circuit name `{}`", c.name)));
        }
        let file = format!("{CIRCUITS_DIR}/{}.qasm", c.name);
        let text = emit_qasm(c);
        let path = dir.join(&file);
        fs::write(&path, &text).map_err(io_err(&path))?;
        let _ = writeln!(manifest, "{file},{},{},{}", c.name, c.num_qubits, sha256_hex(text.as_bytes()));
    }
    let path = dir.join(MANIFEST);
    fs::write(&path, &manifest).map_err(io_err(&path))?;
    Ok(sha256_hex(manifest.as_bytes()))
}

pub fn read_manifest(dir: &Path) -> Result<Vec<ManifestEntry>, DatasetError> {
    let path = dir.join(MANIFEST);
    let mut rdr = csv::Reader::from_path(&path).map_err(csv_err(&path))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err(&path))?;
        if rec.len() != 4 {
            return Err(malformed(&path, format!("expected 4 fields, found {}", rec.len())));
        }
        out.push(ManifestEntry {
            file: rec[0].to_owned(),
            circuit: rec[1].to_owned(),
            num_qubits: rec[2]
                .parse()
                .map_err(|_| malformed(&path, format!("bad qubit count `{}`", &rec[2])))?,
            sha256: rec[3].to_owned(),
        });
    }
    Ok(out)
}

/// Circuits in manifest order, each checked against its recorded hash.
pub fn read_corpus(dir: &Path) -> Result<Vec<Circuit>, DatasetError> {
    read_manifest(dir)?
        .into_iter()
        .map(|e| {
            let path = dir.join(&e.file);
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            if sha256_hex(text.as_bytes()) != e.sha256 {
                return Err(DatasetError::HashMismatch { path });
            }
            let c = parse_qasm(&text).map_err(|source| DatasetError::Qasm { path: path.clone(), source })?;
            if c.num_qubits != e.num_qubits {
                return Err(malformed(&path, "qubit count differs from the manifest"));
            }
            Ok(c.named(e.circuit))
        })
        .collect()
}

fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>), DatasetError> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = rdr.headers().map_err(csv_err(path))?.iter().map(str::to_owned).collect();
    let rows = rdr.records().collect::<Result<Vec<_>, _>>().map_err(csv_err(path))?;
    Ok((header, rows))
}

fn parse_f64(path: &Path, s: &str) -> Result<f64, DatasetError> {
    s.parse().map_err(|_| malformed(path, format!("bad number `{s}`")))
}

/// Writes `features.csv` and `labels.csv` for labeled samples. All samples
/// must share one feature schema and one option list.
pub fn write_labeled(dir: &Path, samples: &[LabeledSample]) -> Result<(), DatasetError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let names: Vec<String> = match samples.first() {
        Some(s) => s.features.names.to_vec(),
        None => FeatureSchema::full().names,
    };
    let options: Vec<String> = samples
        .first()
        .map(|s| s.ranking.options.iter().map(|o| o.id()).collect())
        .unwrap_or_default();
    for s in samples {
        let same_options = s.ranking.options.len() == options.len()
            && s.ranking.options.iter().zip(&options).all(|(o, id)| o.id() == *id);
        if *s.features.names != *names || !same_options {
            return Err(malformed(dir, format!("sample `{}` has a different layout", s.name)));
        }
    }

    let mut header = vec!["circuit".to_owned()];
    header.extend(names.iter().cloned());
    header.push("label".to_owned());
    write_csv(
        &dir.join(FEATURES_CSV),
        &header,
        samples.iter().map(|s| {
            let mut row = vec![s.name.clone()];
            row.extend(s.features.values.iter().map(|v| v.to_string()));
            row.push(s.label.clone());
            row
        }),
    )?;

    let mut header: Vec<String> = ["circuit", "num_qubits", "label"].map(String::from).to_vec();
    header.extend(options.iter().cloned());
    write_csv(
        &dir.join(LABELS_CSV),
        &header,
        samples.iter().map(|s| {
            let mut row = vec![s.name.clone(), s.num_qubits.to_string(), s.label.clone()];
            row.extend(s.ranking.scores.iter().map(|sc| sc.log_value.to_string()));
            row
        }),
    )
}

/// Reloads what [`write_labeled`] wrote; rankings are rebuilt from the
/// stored log scores.
pub fn read_labeled(dir: &Path) -> Result<Vec<LabeledSample>, DatasetError> {
    let fpath = dir.join(FEATURES_CSV);
    let (fheader, frows) = read_csv(&fpath)?;
    if fheader.len() < 2 || fheader[0] != "circuit" || fheader[fheader.len() - 1] != "label" {
        return Err(malformed(&fpath, "header must be `circuit,<features...>,label`"));
    }
    let schema = FeatureSchema::from_names(&fheader[1..fheader.len() - 1])?;
    let names: Arc<[String]> = Arc::from(schema.names.clone());

    let lpath = dir.join(LABELS_CSV);
    let (lheader, lrows) = read_csv(&lpath)?;
    if lheader.len() < 4 || lheader[..3] != ["circuit", "num_qubits", "label"] {
        return Err(malformed(&lpath, "header must be `circuit,num_qubits,label,<options...>`"));
    }
    let options = lheader[3..]
        .iter()
        .map(|id| id.parse::<CompilationOption>())
        .collect::<Result<Vec<_>, _>>()?;
    if frows.len() != lrows.len() {
        return Err(malformed(dir, "features.csv and labels.csv differ in row count"));
    }

    let mut out = Vec::with_capacity(lrows.len());
    for (f, l) in frows.iter().zip(&lrows) {
        if f.len() != fheader.len() || l.len() != lheader.len() {
            return Err(malformed(dir, "ragged row"));
        }
        if f[0] != l[0] {
            return Err(malformed(dir, format!("row order differs at `{}`", &l[0])));
        }
        let values = (1..f.len() - 1)
            .map(|i| parse_f64(&fpath, &f[i]))
            .collect::<Result<Vec<_>, _>>()?;
        let scores = (3..l.len())
            .map(|i| {
                let v = parse_f64(&lpath, &l[i])?;
                if v == f64::NEG_INFINITY {
                    Ok(EvalScore::INFEASIBLE)
                } else if v.is_finite() && v <= 0.0 {
                    Ok(EvalScore::from_log(v))
                } else {
                    Err(malformed(&lpath, format!("log score `{v}` out of range")))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let ranking = rank_scores(options.clone(), scores)?;
        let label = l[2].to_owned();
        if !ranking.any_feasible() || ranking.best().id() != label || f[f.len() - 1] != label {
            return Err(malformed(&lpath, format!("label of `{}` is not its best option", &l[0])));
        }
        out.push(LabeledSample {
            name: l[0].to_owned(),
            num_qubits: l[1]
                .parse()
                .map_err(|_| malformed(&lpath, format!("bad qubit count `{}`", &l[1])))?,
            features: FeatureVector {
                values,
                names: names.clone(),
            },
            label,
            ranking,
        });
    }
    Ok(out)
}

/// `option_id,score,rank,feasible`, best option first.
pub fn write_ranking(path: &Path, r: &OptionRanking) -> Result<(), DatasetError> {
    let header = ["option_id", "score", "rank", "feasible"].map(String::from);
    write_csv(
        path,
        &header,
        r.order.iter().map(|&i| {
            vec![
                r.options[i].id(),
                r.scores[i].value.to_string(),
                r.rank_of[i].to_string(),
                r.scores[i].feasible.to_string(),
            ]
        }),
    )
}

pub fn write_histogram(path: &Path, bins: &[HistogramBin]) -> Result<(), DatasetError> {
    let header = ["rank", "count", "frequency"].map(String::from);
    write_csv(
        path,
        &header,
        bins.iter()
            .map(|b| vec![b.rank.to_string(), b.count.to_string(), b.frequency.to_string()]),
    )
}

pub fn write_dots(path: &Path, rows: &[DotRow]) -> Result<(), DatasetError> {
    let header = ["circuit", "num_qubits", "option_id", "normalized_score", "predicted"].map(String::from);
    write_csv(
        path,
        &header,
        rows.iter().map(|r| {
            vec![
                r.circuit.clone(),
                r.num_qubits.to_string(),
                r.option_id.clone(),
                r.normalized_score.to_string(),
                u8::from(r.predicted).to_string(),
            ]
        }),
    )
}

pub fn write_importance(path: &Path, imp: &ImportanceReport) -> Result<(), DatasetError> {
    let header = ["feature", "importance", "std"].map(String::from);
    write_csv(
        path,
        &header,
        imp.names
            .iter()
            .zip(imp.importance.iter().zip(&imp.std))
            .map(|(n, (m, s))| vec![n.clone(), m.to_string(), s.to_string()]),
    )
}

/// Keeps `samples` whose names appear in `names`, in the order of `names`.
pub fn select_by_name(samples: &[LabeledSample], names: &[String]) -> Result<Vec<LabeledSample>, String> {
    let index: HashMap<&str, &LabeledSample> = samples.iter().map(|s| (s.name.as_str(), s)).collect();
    names
        .iter()
        .map(|n| index.get(n.as_str()).map(|s| (*s).clone()).ok_or_else(|| n.clone()))
        .collect()
}
