//! Labeled samples, train/test splitting and rank-based evaluation.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::Circuit;
use crate::compiler::CompilationOption;
use crate::devices::DeviceModel;
use crate::features::{extract_features, prune_constant_features, FeatureSchema, FeatureVector};
use crate::ml::{
    fit_forest, stream_rng, ClassifierModel, ForestParams, GaussianNb, KnnModel, MlError, TrainedModel,
};
use crate::scoring::{normalize_scores, rank_options, OptionRanking, ScoreError};

/// Generator stream reserved for train/test shuffles.
const SPLIT_STREAM: u64 = 0x5b1;

/// Reference quality of a random forest on a large benchmark corpus;
/// reported next to measured values, never asserted.
pub const REFERENCE_ACCURACY: f64 = 0.75;
pub const REFERENCE_TOP3: f64 = 0.90;
pub const REFERENCE_WORST_RANK: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("need at least 2 samples to split, got {0}")]
    TooSmall(usize),
    #[error("test fraction {0} is not in (0, 1)")]
    BadFraction(f64),
    #[error("split of {n} samples at {fraction} leaves one side empty")]
    DegenerateSplit { n: usize, fraction: f64 },
    #[error("no samples to evaluate")]
    Empty,
    #[error("predicted option `{option}` is missing from the ranking of `{circuit}`")]
    MissingPrediction { circuit: String, option: String },
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error(transparent)]
    Score(#[from] ScoreError),
}

/// A circuit with its features and ground-truth ranking over all options.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSample {
    pub name: String,
    pub num_qubits: usize,
    pub features: FeatureVector,
    /// Id of `ranking.best()`.
    pub label: String,
    pub ranking: OptionRanking,
}

impl LabeledSample {
    /// `None` if no option is feasible.
    pub fn from_ranking(c: &Circuit, features: FeatureVector, ranking: OptionRanking) -> Option<LabeledSample> {
        ranking.any_feasible().then(|| LabeledSample {
            name: c.name.clone(),
            num_qubits: c.num_qubits,
            features,
            label: ranking.best().id(),
            ranking,
        })
    }
}

/// Brute-force labels one circuit; `None` if every option is infeasible.
pub fn label_circuit(
    c: &Circuit,
    options: &[CompilationOption],
    devices: &[DeviceModel],
    schema: &FeatureSchema,
) -> Result<Option<LabeledSample>, ScoreError> {
    let ranking = rank_options(c, options, devices)?;
    Ok(LabeledSample::from_ranking(c, extract_features(c, schema), ranking))
}

/// Seeded shuffle, then the first `⌊n·(1 − f)⌋` items train and the rest test.
pub fn split<T: Clone>(data: &[T], test_fraction: f64, seed: u64) -> Result<(Vec<T>, Vec<T>), EvalError> {
    let n = data.len();
    if n < 2 {
        return Err(EvalError::TooSmall(n));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(EvalError::BadFraction(test_fraction));
    }
    let n_train = libm::floor(n as f64 * (1.0 - test_fraction)) as usize;
    if n_train == 0 || n_train == n {
        return Err(EvalError::DegenerateSplit { n, fraction: test_fraction });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut stream_rng(seed, SPLIT_STREAM));
    let pick = |ix: &[usize]| ix.iter().map(|&i| data[i].clone()).collect::<Vec<T>>();
    Ok((pick(&idx[..n_train]), pick(&idx[n_train..])))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Share of predictions ranked first.
    pub accuracy: f64,
    /// Share of predictions ranked third or better.
    pub top3: f64,
    pub worst_rank: usize,
    pub n_options: usize,
    /// Ground-truth rank of each prediction, in test order.
    pub ranks: Vec<usize>,
}

/// Aggregates per-sample ranks.
pub fn report_from_ranks(ranks: &[usize], n_options: usize) -> Result<EvalReport, EvalError> {
    if ranks.is_empty() {
        return Err(EvalError::Empty);
    }
    let n = ranks.len() as f64;
    Ok(EvalReport {
        accuracy: ranks.iter().filter(|&&r| r == 1).count() as f64 / n,
        top3: ranks.iter().filter(|&&r| r <= 3).count() as f64 / n,
        worst_rank: *ranks.iter().max().expect("non-empty"),
        n_options,
        ranks: ranks.to_vec(),
    })
}

/// Ground-truth rank of `option` for `sample`.
pub fn rank_of_prediction(sample: &LabeledSample, option: &str) -> Result<usize, EvalError> {
    sample
        .ranking
        .rank_of_id(option)
        .ok_or_else(|| EvalError::MissingPrediction {
            circuit: sample.name.clone(),
            option: String::from(option),
        })
}

pub fn evaluate(model: &TrainedModel, test: &[LabeledSample]) -> Result<EvalReport, EvalError> {
    let ranks = test
        .iter()
        .map(|s| rank_of_prediction(s, model.predict(&s.features)?))
        .collect::<Result<Vec<_>, _>>()?;
    report_from_ranks(&ranks, test.first().map_or(0, |s| s.ranking.options.len()))
}

/// Accuracy of always predicting the most frequent training label (lowest
/// option order on ties).
pub fn majority_baseline(train: &[LabeledSample], test: &[LabeledSample]) -> Result<(String, f64), EvalError> {
    let first = train.first().ok_or(EvalError::Empty)?;
    if test.is_empty() {
        return Err(EvalError::Empty);
    }
    let ids: Vec<String> = first.ranking.options.iter().map(CompilationOption::id).collect();
    let mut counts = vec![0usize; ids.len()];
    for s in train {
        if let Some(i) = ids.iter().position(|id| *id == s.label) {
            counts[i] += 1;
        }
    }
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    let hits = test.iter().filter(|s| s.label == ids[best]).count();
    Ok((ids[best].clone(), hits as f64 / test.len() as f64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub rank: usize,
    pub count: usize,
    pub frequency: f64,
}

/// Relative frequency of each rank `1..=n_options`.
pub fn rank_histogram(report: &EvalReport) -> Vec<HistogramBin> {
    let n = report.ranks.len() as f64;
    (1..=report.n_options)
        .map(|rank| {
            let count = report.ranks.iter().filter(|&&r| r == rank).count();
            HistogramBin {
                rank,
                count,
                frequency: count as f64 / n,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DotRow {
    pub circuit: String,
    pub num_qubits: usize,
    pub option_id: String,
    pub normalized_score: f64,
    pub predicted: bool,
}

/// One row per (test circuit, option), circuits ordered by width and then by
/// test order, options in enumeration order.
pub fn dot_rows(model: &TrainedModel, test: &[LabeledSample]) -> Result<Vec<DotRow>, EvalError> {
    let mut order: Vec<usize> = (0..test.len()).collect();
    order.sort_by_key(|&i| test[i].num_qubits);
    let mut rows = Vec::new();
    for i in order {
        let s = &test[i];
        let predicted = model.predict(&s.features)?;
        let norm = normalize_scores(&s.ranking);
        for (opt, score) in s.ranking.options.iter().zip(norm) {
            let id = opt.id();
            rows.push(DotRow {
                circuit: s.name.clone(),
                num_qubits: s.num_qubits,
                predicted: id == predicted,
                option_id: id,
                normalized_score: score,
            });
        }
    }
    Ok(rows)
}

/// Which classifier to train.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierSpec {
    Forest(ForestParams),
    Knn { k: usize },
    NaiveBayes,
}

/// Pruned schema, feature rows and class indices.
pub type TrainingSet = (FeatureSchema, Vec<Vec<f64>>, Vec<usize>);

/// Training matrix over a schema pruned of all-zero columns; class `i` is
/// `labels[i]`.
pub fn prepare_training(samples: &[LabeledSample], labels: &[String]) -> Result<TrainingSet, EvalError> {
    let vectors: Vec<FeatureVector> = samples.iter().map(|s| s.features.clone()).collect();
    let schema = prune_constant_features(&vectors).map_err(MlError::from)?;
    let x = vectors
        .iter()
        .map(|v| schema.project(v).map(|p| p.values))
        .collect::<Result<Vec<_>, _>>()
        .map_err(MlError::from)?;
    let y = samples
        .iter()
        .map(|s| {
            labels
                .iter()
                .position(|l| *l == s.label)
                .ok_or_else(|| MlError::UnknownLabel(s.label.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((schema, x, y))
}

/// Fits `spec` on `samples` serially.
pub fn train_model(
    samples: &[LabeledSample],
    labels: &[String],
    spec: &ClassifierSpec,
    seed: u64,
) -> Result<TrainedModel, EvalError> {
    let (schema, x, y) = prepare_training(samples, labels)?;
    let k = labels.len();
    let classifier = match *spec {
        ClassifierSpec::Forest(p) => ClassifierModel::Forest(fit_forest(&x, &y, k, &p, seed)?),
        ClassifierSpec::Knn { k: nn } => ClassifierModel::Knn(KnnModel::fit(&x, &y, k, nn)?),
        ClassifierSpec::NaiveBayes => ClassifierModel::NaiveBayes(GaussianNb::fit(&x, &y, k)?),
    };
    Ok(TrainedModel {
        schema,
        labels: labels.to_vec(),
        classifier,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::enumerate_options;
    use crate::corpus::{ghz, qft};
    use crate::devices::builtin_devices;
    use crate::scoring::{rank_scores, EvalScore};
    use proptest::prelude::*;

    #[test]
    fn measures_from_ranks() {
        let r = report_from_ranks(&[1, 2, 5, 1], 30).unwrap();
        assert_eq!((r.accuracy, r.top3, r.worst_rank), (0.5, 0.75, 5));
        let r = report_from_ranks(&[1, 1, 1], 30).unwrap();
        assert_eq!((r.accuracy, r.top3, r.worst_rank), (1.0, 1.0, 1));
        assert_eq!(report_from_ranks(&[], 30), Err(EvalError::Empty));
        let h = rank_histogram(&report_from_ranks(&[1, 2, 5, 1], 6).unwrap());
        assert_eq!(h.len(), 6);
        assert_eq!((h[0].count, h[4].count), (2, 1));
        assert!((h.iter().map(|b| b.frequency).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn split_sizes() {
        let data: Vec<usize> = (0..2098).collect();
        let (tr, te) = split(&data, 0.3, 1).unwrap();
        assert_eq!((tr.len(), te.len()), (1468, 630));
        assert_eq!(split(&data, 0.3, 1).unwrap(), (tr.clone(), te));
        let mut all = tr;
        all.extend(split(&data, 0.3, 1).unwrap().1);
        all.sort_unstable();
        assert_eq!(all, data);
        let (tr, te) = split(&[1, 2, 3, 4], 0.5, 0).unwrap();
        assert_eq!((tr.len(), te.len()), (2, 2));
        assert_eq!(split(&[1], 0.5, 0), Err(EvalError::TooSmall(1)));
        assert_eq!(split(&[1, 2], 1.0, 0), Err(EvalError::BadFraction(1.0)));
        assert!(matches!(split(&[1, 2], 0.99, 0), Err(EvalError::DegenerateSplit { .. })));
    }

    fn sample(name: &str, label_idx: usize, n_opts: usize) -> LabeledSample {
        let opts: Vec<CompilationOption> =
            (0..n_opts).map(|i| CompilationOption::new(alloc::format!("d{i}"), crate::compiler::Setting::O1)).collect();
        let scores = (0..n_opts)
            .map(|i| EvalScore::from_log(if i == label_idx { -0.1 } else { -1.0 - i as f64 }))
            .collect();
        let ranking = rank_scores(opts, scores).unwrap();
        let c = Circuit::new(2, 0).named(name);
        let schema = FeatureSchema::full();
        LabeledSample::from_ranking(&c, extract_features(&c, &schema), ranking).unwrap()
    }

    #[test]
    fn majority_baseline_counts_labels() {
        let train = [sample("a", 1, 3), sample("b", 1, 3), sample("c", 0, 3)];
        let test = [sample("d", 1, 3), sample("e", 2, 3)];
        assert_eq!(majority_baseline(&train, &test).unwrap(), ("d1/A/O1".into(), 0.5));
    }

    #[test]
    fn ghz_labels_and_dots() {
        let fleet = builtin_devices();
        let opts = enumerate_options(&fleet).unwrap();
        let schema = FeatureSchema::full();
        let s = label_circuit(&ghz(3), &opts, &fleet, &schema).unwrap().unwrap();
        assert_eq!(s.ranking.options.len(), 30);
        assert_eq!(s.label, s.ranking.best().id());
        assert!(label_circuit(&Circuit::new(200, 0), &opts, &fleet, &schema).unwrap().is_none());

        let labels: Vec<String> = opts.iter().map(CompilationOption::id).collect();
        let samples = vec![s.clone(), label_circuit(&qft(4), &opts, &fleet, &schema).unwrap().unwrap()];
        let model = train_model(&samples, &labels, &ClassifierSpec::Knn { k: 1 }, 0).unwrap();
        let dots = dot_rows(&model, &samples[..1]).unwrap();
        assert_eq!(dots.len(), 30);
        assert_eq!(dots.iter().filter(|d| d.predicted).count(), 1);
        // 1-NN on its own training point predicts the true best option.
        let flagged = dots.iter().find(|d| d.predicted).unwrap();
        assert_eq!(flagged.normalized_score, 1.0);
        let report = evaluate(&model, &samples).unwrap();
        assert_eq!(report.accuracy, 1.0);
    }

    #[test]
    fn wide_circuit_has_twelve_nonzero_dots() {
        let fleet = builtin_devices();
        let opts = enumerate_options(&fleet).unwrap();
        let schema = FeatureSchema::full();
        let mut wide = Circuit::new(50, 50).named("wide");
        wide.apply(crate::circuit::GateKind::H, &[0], &[]).measure_all();
        let s = label_circuit(&wide, &opts, &fleet, &schema).unwrap().unwrap();
        let labels: Vec<String> = opts.iter().map(CompilationOption::id).collect();
        let model = train_model(&[s.clone(), s.clone()], &labels, &ClassifierSpec::NaiveBayes, 0).unwrap();
        let dots = dot_rows(&model, &[s]).unwrap();
        assert_eq!(dots.iter().filter(|d| d.normalized_score > 0.0).count(), 12);
    }

    proptest! {
        #[test]
        fn report_invariants(ranks in proptest::collection::vec(1usize..=30, 1..100)) {
            let r = report_from_ranks(&ranks, 30).unwrap();
            prop_assert!(r.accuracy <= r.top3 && r.top3 <= 1.0);
            prop_assert!((1..=30).contains(&r.worst_rank));
            let total: f64 = rank_histogram(&r).iter().map(|b| b.frequency).sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }

        #[test]
        fn split_partitions(n in 2usize..200, f in 0.05f64..0.95, seed: u64) {
            let data: Vec<usize> = (0..n).collect();
            if let Ok((tr, te)) = split(&data, f, seed) {
                prop_assert_eq!(tr.len(), libm::floor(n as f64 * (1.0 - f)) as usize);
                let mut all = tr;
                all.extend(te);
                all.sort_unstable();
                prop_assert_eq!(all, data);
            }
        }
    }
}
