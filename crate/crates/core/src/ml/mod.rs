//! Classifiers mapping circuit features to the best compilation option.
//!
//! Models work on dense `f64` rows and class indices `0..n_classes`.
//! [`TrainedModel`] binds a fitted classifier to a feature schema and the
//! option ids that the class indices stand for.

pub mod bayes;
pub mod cv;
pub mod forest;
pub mod knn;
pub mod tree;

use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureError, FeatureSchema, FeatureVector};

pub use bayes::GaussianNb;
pub use cv::{cross_val_accuracy, default_forest_grid, grid_search_cv, kfold_indices, select_best, CvResult, Folds};
pub use forest::{fit_forest, fit_forest_tree, FeatureSubset, ForestParams, Importance, RandomForest};
pub use knn::KnnModel;
pub use tree::{fit_tree, gini, DecisionTree, TreeNode, TreeParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MlError {
    #[error("empty training data")]
    EmptyData,
    #[error("{x} feature rows but {y} labels")]
    LengthMismatch { x: usize, y: usize },
    #[error("row {row} has {found} features, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("label {label} is outside 0..{n_classes}")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("non-finite feature value in row {row}")]
    NonFinite { row: usize },
    #[error("invalid parameter: {0}")]
    BadParam(&'static str),
    #[error("k = {k} is outside 1..={n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error(transparent)]
    Schema(#[from] FeatureError),
}

/// Validates a training set and returns its width.
pub(crate) fn check_data(x: &[Vec<f64>], y: &[usize], n_classes: usize) -> Result<usize, MlError> {
    if x.is_empty() {
        return Err(MlError::EmptyData);
    }
    if x.len() != y.len() {
        return Err(MlError::LengthMismatch { x: x.len(), y: y.len() });
    }
    let width = x[0].len();
    for (row, r) in x.iter().enumerate() {
        if r.len() != width {
            return Err(MlError::Ragged {
                row,
                expected: width,
                found: r.len(),
            });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(MlError::NonFinite { row });
        }
    }
    if let Some(&label) = y.iter().find(|&&l| l >= n_classes) {
        return Err(MlError::LabelOutOfRange { label, n_classes });
    }
    Ok(width)
}

/// Generator for stream `stream` of `seed`; distinct streams are independent.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Indices of `scores` by descending score, lower index first on ties.
pub fn rank_desc(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

/// Common interface of the fitted classifiers.
pub trait Classifier {
    fn n_classes(&self) -> usize;

    /// One score per class; higher is better.
    fn class_scores(&self, x: &[f64]) -> Vec<f64>;

    fn predict(&self, x: &[f64]) -> usize {
        rank_desc(&self.class_scores(x))[0]
    }

    /// All classes, best first.
    fn rank_classes(&self, x: &[f64]) -> Vec<usize> {
        rank_desc(&self.class_scores(x))
    }
}

/// Fitted classifier of any supported kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierModel {
    Forest(RandomForest),
    Knn(KnnModel),
    NaiveBayes(GaussianNb),
}

impl Classifier for ClassifierModel {
    fn n_classes(&self) -> usize {
        match self {
            ClassifierModel::Forest(m) => m.n_classes(),
            ClassifierModel::Knn(m) => m.n_classes(),
            ClassifierModel::NaiveBayes(m) => m.n_classes(),
        }
    }

    fn class_scores(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ClassifierModel::Forest(m) => m.class_scores(x),
            ClassifierModel::Knn(m) => m.class_scores(x),
            ClassifierModel::NaiveBayes(m) => m.class_scores(x),
        }
    }
}

/// Per-feature importance of a forest, keyed by schema name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub names: Vec<String>,
    pub importance: Vec<f64>,
    pub std: Vec<f64>,
    /// No tree had a split; all importances are zero.
    pub degenerate: bool,
}

/// A classifier bound to its input schema and output label space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub schema: FeatureSchema,
    /// Compilation option id of each class index.
    pub labels: Vec<String>,
    pub classifier: ClassifierModel,
}

impl TrainedModel {
    /// Values of `v` in schema order.
    pub fn row(&self, v: &FeatureVector) -> Result<Vec<f64>, MlError> {
        if *v.names == *self.schema.names {
            return Ok(v.values.clone());
        }
        Ok(self.schema.project(v)?.values)
    }

    pub fn predict(&self, v: &FeatureVector) -> Result<&str, MlError> {
        let row = self.row(v)?;
        Ok(&self.labels[self.classifier.predict(&row)])
    }

    /// The `k` best options with their scores (vote shares for the forest
    /// and nearest neighbor, log-posteriors for naive Bayes).
    pub fn predict_top_k(&self, v: &FeatureVector, k: usize) -> Result<Vec<(&str, f64)>, MlError> {
        if k == 0 || k > self.labels.len() {
            return Err(MlError::KOutOfRange { k, n: self.labels.len() });
        }
        let row = self.row(v)?;
        let scores = self.classifier.class_scores(&row);
        Ok(rank_desc(&scores)
            .into_iter()
            .take(k)
            .map(|i| (self.labels[i].as_str(), scores[i]))
            .collect())
    }

    pub fn label_index(&self, label: &str) -> Result<usize, MlError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| MlError::UnknownLabel(String::from(label)))
    }

    /// `None` unless the classifier is a forest.
    pub fn feature_importance(&self) -> Option<ImportanceReport> {
        match &self.classifier {
            ClassifierModel::Forest(f) => {
                let imp = f.feature_importance();
                Some(ImportanceReport {
                    names: self.schema.names.clone(),
                    importance: imp.mean,
                    std: imp.std,
                    degenerate: imp.degenerate,
                })
            }
            _ => None,
        }
    }
}
