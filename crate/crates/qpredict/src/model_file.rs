//! Versioned JSON model files.
//!
//! Layout: `{"format": "qpredict-model", "version": 1, "model": {...},
//! "training": {...}}`. Forest trees are stored as node arrays; each node is
//! either `{"split": {feature, threshold, left, right, decrease}}` or
//! `{"leaf": {label, counts}}`, with the root at index 0.

use std::fs;
use std::path::{Path, PathBuf};

use qpredict_core::eval::ClassifierSpec;
use qpredict_core::ml::{Classifier, ClassifierModel, DecisionTree, TrainedModel, TreeNode};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MODEL_FORMAT: &str = "qpredict-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("model file is empty")]
    Empty,
    #[error("model file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("not a model file (format `{0}`)")]
    Format(String),
    #[error("model file version {found} is not supported (expected {MODEL_VERSION})")]
    Version { found: u64 },
    #[error("inconsistent model: {0}")]
    Inconsistent(String),
}

/// Cross-validation outcome kept with the model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub folds: usize,
    pub stratified: bool,
    pub grid: Vec<ClassifierSpec>,
    /// Mean held-out accuracy of each grid point.
    pub accuracy: Vec<f64>,
    pub best_index: usize,
}

/// How the model was produced, enough to rebuild its evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingInfo {
    pub classifier: ClassifierSpec,
    pub seed: u64,
    pub test_fraction: f64,
    pub n_train: usize,
    /// Held-out circuits, in split order.
    pub test_circuits: Vec<String>,
    pub cv: Option<CvSummary>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelFile {
    pub model: TrainedModel,
    pub training: Option<TrainingInfo>,
}

#[derive(Serialize)]
struct EnvelopeOut<'a> {
    format: &'static str,
    version: u32,
    model: &'a TrainedModel,
    #[serde(skip_serializing_if = "Option::is_none")]
    training: Option<&'a TrainingInfo>,
}

#[derive(Deserialize)]
struct EnvelopeIn {
    model: TrainedModel,
    #[serde(default)]
    training: Option<TrainingInfo>,
}

pub fn to_json(file: &ModelFile) -> String {
    let mut s = serde_json::to_string(&EnvelopeOut {
        format: MODEL_FORMAT,
        version: MODEL_VERSION,
        model: &file.model,
        training: file.training.as_ref(),
    })
    .expect("models serialize");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<ModelFile, ModelFileError> {
    if text.trim().is_empty() {
        return Err(ModelFileError::Empty);
    }
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value.get("format").and_then(|f| f.as_str()) {
        Some(MODEL_FORMAT) => {}
        other => return Err(ModelFileError::Format(other.unwrap_or("missing").to_owned())),
    }
    match value.get("version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(MODEL_VERSION) => {}
        Some(found) => return Err(ModelFileError::Version { found }),
        None => return Err(ModelFileError::Format("missing version".to_owned())),
    }
    let env: EnvelopeIn = serde_json::from_value(value)?;
    check_model(&env.model)?;
    Ok(ModelFile {
        model: env.model,
        training: env.training,
    })
}

pub fn save_model(path: &Path, file: &ModelFile) -> Result<(), ModelFileError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| ModelFileError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, to_json(file)).map_err(|source| ModelFileError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<ModelFile, ModelFileError> {
    let text = fs::read_to_string(path).map_err(|source| ModelFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    from_json(&text)
}

/// Shape checks that keep prediction from indexing out of bounds.
fn check_model(m: &TrainedModel) -> Result<(), ModelFileError> {
    let bad = |msg: String| Err(ModelFileError::Inconsistent(msg));
    let (k, w) = (m.labels.len(), m.schema.len());
    if m.classifier.n_classes() != k {
        return bad(format!("{} classes but {k} labels", m.classifier.n_classes()));
    }
    match &m.classifier {
        ClassifierModel::Forest(f) => {
            if f.trees.is_empty() {
                return bad("forest without trees".into());
            }
            for (t, tree) in f.trees.iter().enumerate() {
                check_tree(tree, k, w).map_err(|e| ModelFileError::Inconsistent(format!("tree {t}: {e}")))?;
            }
        }
        ClassifierModel::Knn(m) => {
            let widths_ok = m.rows.iter().all(|r| r.len() == w)
                && m.standardizer.mean.len() == w
                && m.standardizer.std.len() == w;
            if !widths_ok || m.rows.len() != m.labels.len() || m.labels.iter().any(|&l| l >= k) {
                return bad("nearest-neighbor data does not match the schema".into());
            }
            if m.k == 0 || m.k > m.rows.len() {
                return bad(format!("k = {} with {} stored rows", m.k, m.rows.len()));
            }
        }
        ClassifierModel::NaiveBayes(nb) => {
            let shaped = |rows: &[Vec<f64>]| rows.len() == k && rows.iter().all(|r| r.len() == w);
            if !shaped(&nb.means) || !shaped(&nb.vars) || nb.log_prior.len() != k {
                return bad("naive Bayes tables do not match the schema".into());
            }
        }
    }
    Ok(())
}

fn check_tree(tree: &DecisionTree, k: usize, w: usize) -> Result<(), String> {
    if tree.n_classes != k || tree.n_features != w {
        return Err(format!("shape {}x{} instead of {k}x{w}", tree.n_classes, tree.n_features));
    }
    if tree.nodes.is_empty() {
        return Err("no nodes".into());
    }
    let n = tree.nodes.len();
    for (i, node) in tree.nodes.iter().enumerate() {
        match node {
            TreeNode::Split {
                feature, left, right, ..
            } => {
                // Children always follow their parent, which also rules out cycles.
                if *feature >= w || *left <= i || *right <= i || *left >= n || *right >= n {
                    return Err(format!("node {i} is malformed"));
                }
            }
            TreeNode::Leaf { label, counts } => {
                if *label >= k || counts.len() != k {
                    return Err(format!("leaf {i} is malformed"));
                }
            }
        }
    }
    Ok(())
}
