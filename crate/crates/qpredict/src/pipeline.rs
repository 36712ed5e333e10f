//! Labeling, training, evaluation and the runtime comparison.
//!
//! Everything here runs on the current rayon pool; callers pick the thread
//! count with `ThreadPool::install`. Results never depend on it: parallel
//! stages collect in input order and every random draw comes from a stream
//! derived from the seed and a fixed index.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use log::{info, warn};
use qpredict_core::circuit::Circuit;
use qpredict_core::compiler::{compile, device_for, CompilationOption, CompileError};
use qpredict_core::devices::DeviceModel;
use qpredict_core::eval::{
    dot_rows, evaluate, majority_baseline, prepare_training, rank_histogram, split, ClassifierSpec, DotRow, EvalError,
    EvalReport, HistogramBin, LabeledSample, REFERENCE_ACCURACY, REFERENCE_TOP3, REFERENCE_WORST_RANK,
};
use qpredict_core::features::{extract_features, FeatureSchema};
use qpredict_core::ml::{
    cross_val_accuracy, fit_forest_tree, kfold_indices, select_best, ClassifierModel, CvResult, GaussianNb,
    ImportanceReport, KnnModel, MlError, RandomForest, TrainedModel,
};
use qpredict_core::scoring::{evaluate_score, rank_scores, score_option, EvalScore, ScoreError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{self, DatasetError};
use crate::model_file::{CvSummary, ModelFile, TrainingInfo};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);
pub const REPORT_JSON: &str = "report.json";
pub const FIG4_CSV: &str = "fig4_histogram.csv";
pub const FIG5_CSV: &str = "fig5_dots.csv";
pub const FIG6_CSV: &str = "fig6_importance.csv";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no {0} given")]
    Empty(&'static str),
    #[error("every labeled circuit has the same best option `{0}`; nothing to learn")]
    DegenerateLabels(String),
    #[error("model carries no training record, so its test split is unknown")]
    NoTrainingInfo,
    #[error("test circuit `{0}` is missing from the dataset")]
    MissingSample(String),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// A circuit left out of the dataset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Excluded {
    pub circuit: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Labeled {
    pub samples: Vec<LabeledSample>,
    pub excluded: Vec<Excluded>,
}

/// Scores one option, treating a compile that outlives `timeout` as
/// infeasible. The compile is not interrupted; the cutoff is applied after it
/// returns. A zero timeout admits nothing.
pub fn timed_score(
    c: &Circuit,
    opt: &CompilationOption,
    devices: &[DeviceModel],
    timeout: Duration,
) -> Result<(EvalScore, bool), ScoreError> {
    if timeout.is_zero() {
        return Ok((EvalScore::INFEASIBLE, true));
    }
    let start = Instant::now();
    let score = score_option(c, opt, devices)?;
    if start.elapsed() > timeout {
        return Ok((EvalScore::INFEASIBLE, true));
    }
    Ok((score, false))
}

/// Brute-force labels every circuit over every option, in parallel across
/// circuits and options. Circuits with no feasible option are excluded and
/// logged.
pub fn label_dataset(
    circuits: &[Circuit],
    options: &[CompilationOption],
    devices: &[DeviceModel],
    timeout: Duration,
) -> Result<Labeled, PipelineError> {
    if circuits.is_empty() {
        return Err(PipelineError::Empty("circuits"));
    }
    if options.is_empty() {
        return Err(PipelineError::Empty("compilation options"));
    }
    let schema = FeatureSchema::full();
    let largest = devices.iter().map(|d| d.num_qubits).max().unwrap_or(0);
    let results = circuits
        .par_iter()
        .map(|c| {
            let scored = options
                .par_iter()
                .map(|o| timed_score(c, o, devices, timeout))
                .collect::<Result<Vec<_>, _>>()?;
            let timed_out = scored.iter().filter(|(_, t)| *t).count();
            let ranking = rank_scores(options.to_vec(), scored.into_iter().map(|(s, _)| s).collect())?;
            let sample = LabeledSample::from_ranking(c, extract_features(c, &schema), ranking);
            Ok(sample.ok_or_else(|| Excluded {
                circuit: c.name.clone(),
                reason: if c.num_qubits > largest {
                    format!("needs {} qubits, largest device has {largest}", c.num_qubits)
                } else {
                    format!("no feasible option ({timed_out} timed out)")
                },
            }))
        })
        .collect::<Result<Vec<_>, ScoreError>>()?;
    let mut labeled = Labeled {
        samples: Vec::new(),
        excluded: Vec::new(),
    };
    for r in results {
        match r {
            Ok(s) => labeled.samples.push(s),
            Err(e) => {
                info!("excluded {}: {}", e.circuit, e.reason);
                labeled.excluded.push(e);
            }
        }
    }
    Ok(labeled)
}

/// Same forest as `qpredict_core::ml::fit_forest`, trees fit in parallel.
pub fn fit_forest_par(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    params: &qpredict_core::ml::ForestParams,
    seed: u64,
) -> Result<RandomForest, MlError> {
    if params.n_trees == 0 {
        return Err(MlError::BadParam("n_trees must be at least 1"));
    }
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| fit_forest_tree(x, y, n_classes, params, seed, t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RandomForest::from_trees(trees, *params, seed))
}

pub fn fit_spec(
    spec: &ClassifierSpec,
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    seed: u64,
) -> Result<ClassifierModel, MlError> {
    Ok(match *spec {
        ClassifierSpec::Forest(p) => ClassifierModel::Forest(fit_forest_par(x, y, n_classes, &p, seed)?),
        ClassifierSpec::Knn { k } => ClassifierModel::Knn(KnnModel::fit(x, y, n_classes, k)?),
        ClassifierSpec::NaiveBayes => ClassifierModel::NaiveBayes(GaussianNb::fit(x, y, n_classes)?),
    })
}

/// Parallel twin of `qpredict_core::ml::grid_search_cv` with the same result.
pub fn grid_search_par(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    grid: &[ClassifierSpec],
    folds: usize,
    seed: u64,
) -> Result<CvResult<ClassifierSpec>, MlError> {
    if grid.is_empty() {
        return Err(MlError::BadParam("empty parameter grid"));
    }
    let f = kfold_indices(y, folds, seed)?;
    let accuracy = grid
        .par_iter()
        .map(|p| cross_val_accuracy(x, y, &f, |tx, ty| fit_spec(p, tx, ty, n_classes, seed)))
        .collect::<Result<Vec<_>, _>>()?;
    let best_index = select_best(&accuracy);
    Ok(CvResult {
        best: grid[best_index],
        best_index,
        accuracy,
        stratified: f.stratified,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainSettings {
    /// Candidate classifiers; more than one triggers cross-validation.
    pub grid: Vec<ClassifierSpec>,
    pub folds: usize,
    pub seed: u64,
    pub test_fraction: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub model: ModelFile,
    pub train: Vec<LabeledSample>,
    pub test: Vec<LabeledSample>,
}

/// Splits, optionally grid-searches on the training part, and fits the
/// chosen classifier on the whole training part. The label space is every
/// option of the dataset, seen in training or not.
pub fn train_experiment(samples: &[LabeledSample], s: &TrainSettings) -> Result<Experiment, PipelineError> {
    let first = samples.first().ok_or(PipelineError::Empty("labeled samples"))?;
    if samples.iter().all(|x| x.label == first.label) {
        return Err(PipelineError::DegenerateLabels(first.label.clone()));
    }
    let labels: Vec<String> = first.ranking.options.iter().map(|o| o.id()).collect();
    let (train, test) = split(samples, s.test_fraction, s.seed)?;
    let (schema, x, y) = prepare_training(&train, &labels)?;
    let k = labels.len();
    let (spec, cv) = match s.grid.as_slice() {
        [] => return Err(PipelineError::Empty("classifier settings")),
        [only] => (*only, None),
        grid => {
            let r = grid_search_par(&x, &y, k, grid, s.folds, s.seed)?;
            if !r.stratified {
                warn!("some option wins fewer than {} training circuits; folds are not stratified", s.folds);
            }
            let summary = CvSummary {
                folds: s.folds,
                stratified: r.stratified,
                grid: grid.to_vec(),
                accuracy: r.accuracy,
                best_index: r.best_index,
            };
            (r.best, Some(summary))
        }
    };
    let classifier = fit_spec(&spec, &x, &y, k, s.seed)?;
    let model = ModelFile {
        model: TrainedModel {
            schema,
            labels,
            classifier,
        },
        training: Some(TrainingInfo {
            classifier: spec,
            seed: s.seed,
            test_fraction: s.test_fraction,
            n_train: train.len(),
            test_circuits: test.iter().map(|t| t.name.clone()).collect(),
            cv,
        }),
    };
    Ok(Experiment { model, train, test })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub option: String,
    pub accuracy: f64,
}

/// Published quality of the original approach, kept for comparison only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub accuracy: f64,
    pub top3: f64,
    pub worst_rank: usize,
    pub note: String,
}

impl Default for Reference {
    fn default() -> Self {
        Reference {
            accuracy: REFERENCE_ACCURACY,
            top3: REFERENCE_TOP3,
            worst_rank: REFERENCE_WORST_RANK,
            note: "reported for a different corpus and real compiler stacks; not a target here".into(),
        }
    }
}

/// Contents of `report.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub classifier: ClassifierSpec,
    pub seed: u64,
    pub test_fraction: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub accuracy: f64,
    pub top3: f64,
    pub worst_rank: usize,
    pub n_options: usize,
    pub majority_baseline: Baseline,
    pub features: Vec<String>,
    pub pruned_features: Vec<String>,
    pub cv: Option<CvSummary>,
    /// Ground-truth rank of each test prediction, in test order.
    pub ranks: Vec<usize>,
    pub reference: Reference,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub report: Report,
    pub eval: EvalReport,
    pub histogram: Vec<HistogramBin>,
    pub dots: Vec<DotRow>,
    pub importance: Option<ImportanceReport>,
}

/// Re-evaluates a trained model on the test circuits recorded in it.
pub fn evaluate_model(file: &ModelFile, samples: &[LabeledSample]) -> Result<Evaluation, PipelineError> {
    let info = file.training.as_ref().ok_or(PipelineError::NoTrainingInfo)?;
    let test = dataset::select_by_name(samples, &info.test_circuits).map_err(PipelineError::MissingSample)?;
    let train: Vec<LabeledSample> = samples
        .iter()
        .filter(|s| !info.test_circuits.contains(&s.name))
        .cloned()
        .collect();
    let eval = evaluate(&file.model, &test)?;
    let (option, accuracy) = majority_baseline(&train, &test)?;
    let model = &file.model;
    let report = Report {
        classifier: info.classifier,
        seed: info.seed,
        test_fraction: info.test_fraction,
        n_train: train.len(),
        n_test: test.len(),
        accuracy: eval.accuracy,
        top3: eval.top3,
        worst_rank: eval.worst_rank,
        n_options: eval.n_options,
        majority_baseline: Baseline { option, accuracy },
        features: model.schema.names.clone(),
        pruned_features: model.schema.pruned.clone(),
        cv: info.cv.clone(),
        ranks: eval.ranks.clone(),
        reference: Reference::default(),
    };
    Ok(Evaluation {
        histogram: rank_histogram(&eval),
        dots: dot_rows(model, &test)?,
        importance: model.feature_importance(),
        report,
        eval,
    })
}

/// Writes `report.json` and the three figure datasets into `dir`. Models
/// without importances get a header-only importance file.
pub fn write_evaluation(dir: &Path, e: &Evaluation) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(|source| PipelineError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let path = dir.join(REPORT_JSON);
    let json = serde_json::to_string_pretty(&e.report).expect("reports serialize") + "\n";
    fs::write(&path, json).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })?;
    dataset::write_histogram(&dir.join(FIG4_CSV), &e.histogram)?;
    dataset::write_dots(&dir.join(FIG5_CSV), &e.dots)?;
    let empty = ImportanceReport {
        names: Vec::new(),
        importance: Vec::new(),
        std: Vec::new(),
        degenerate: true,
    };
    dataset::write_importance(&dir.join(FIG6_CSV), e.importance.as_ref().unwrap_or(&empty))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuntimeComparison {
    pub brute_force_seconds: f64,
    pub predict_and_compile_seconds: f64,
    /// `1 − fast / slow`.
    pub reduction_fraction: f64,
    pub predicted: String,
    /// Best option found by the sweep.
    pub best: String,
    /// Fast-path circuit equals the sweep's circuit for the predicted option.
    pub identical: bool,
}

/// Times the serial sweep over all options against feature extraction,
/// prediction and one compile. Each side keeps its fastest of `repeats` runs.
pub fn runtime_compare(
    c: &Circuit,
    model: &TrainedModel,
    options: &[CompilationOption],
    devices: &[DeviceModel],
    repeats: usize,
) -> Result<RuntimeComparison, PipelineError> {
    if options.is_empty() {
        return Err(PipelineError::Empty("compilation options"));
    }
    let sweep = || -> Result<_, PipelineError> {
        let mut compiled = Vec::with_capacity(options.len());
        let mut scores = Vec::with_capacity(options.len());
        for o in options {
            match compile(c, o, devices) {
                Ok(r) => {
                    scores.push(evaluate_score(Some(&r), device_for(o, devices)?)?);
                    compiled.push(Some(r.circuit));
                }
                Err(CompileError::Infeasible { .. }) => {
                    scores.push(EvalScore::INFEASIBLE);
                    compiled.push(None);
                }
                Err(e) => return Err(e.into()),
            }
        }
        Ok((compiled, rank_scores(options.to_vec(), scores)?))
    };
    let fast = || -> Result<_, PipelineError> {
        let v = extract_features(c, &FeatureSchema::full());
        let opt: CompilationOption = model.predict(&v)?.parse()?;
        let out = match compile(c, &opt, devices) {
            Ok(r) => {
                evaluate_score(Some(&r), device_for(&opt, devices)?)?;
                Some(r.circuit)
            }
            Err(CompileError::Infeasible { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        Ok((opt, out))
    };

    let repeats = repeats.max(1);
    let mut slow_best = f64::INFINITY;
    let mut fast_best = f64::INFINITY;
    let mut last = None;
    for _ in 0..repeats {
        let t = Instant::now();
        let s = sweep()?;
        slow_best = slow_best.min(t.elapsed().as_secs_f64());
        let t = Instant::now();
        let f = fast()?;
        fast_best = fast_best.min(t.elapsed().as_secs_f64());
        last = Some((s, f));
    }
    let ((compiled, ranking), (opt, fast_circuit)) = last.expect("at least one repeat");
    let identical = options
        .iter()
        .position(|o| *o == opt)
        .is_some_and(|i| compiled[i] == fast_circuit);
    Ok(RuntimeComparison {
        brute_force_seconds: slow_best,
        predict_and_compile_seconds: fast_best,
        reduction_fraction: 1.0 - fast_best / slow_best,
        predicted: opt.id(),
        best: ranking.best().id(),
        identical,
    })
}
