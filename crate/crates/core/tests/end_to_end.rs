//! The whole methodology through the public API, serially and in memory.

use qpredict_core::compiler::{compile, device_for, enumerate_options, is_device_legal};
use qpredict_core::corpus::{generate_corpus, ghz, CircuitFamily, CorpusSpec};
use qpredict_core::devices::builtin_devices;
use qpredict_core::eval::{
    dot_rows, evaluate, label_circuit, majority_baseline, rank_histogram, split, train_model, ClassifierSpec,
    LabeledSample,
};
use qpredict_core::features::{extract_features, FeatureSchema};
use qpredict_core::ml::ForestParams;
use qpredict_core::qasm::{emit_qasm, parse_qasm};
use qpredict_core::scoring::normalize_scores;
use qpredict_core::sim::check_equivalence;

fn labeled(spec: &CorpusSpec) -> Vec<LabeledSample> {
    let devices = builtin_devices();
    let options = enumerate_options(&devices).unwrap();
    let schema = FeatureSchema::full();
    generate_corpus(spec)
        .unwrap()
        .iter()
        .filter_map(|c| label_circuit(c, &options, &devices, &schema).unwrap())
        .collect()
}

#[test]
fn split_sizes() {
    let items: Vec<usize> = (0..2098).collect();
    let (train, test) = split(&items, 0.3, 1).unwrap();
    assert_eq!((train.len(), test.len()), (1468, 630));
    let (train, test) = split(&items[..4], 0.5, 1).unwrap();
    assert_eq!((train.len(), test.len()), (2, 2));
    assert_eq!(split(&items, 0.3, 1).unwrap(), split(&items, 0.3, 1).unwrap());
}

#[test]
fn label_train_evaluate() {
    let spec = CorpusSpec {
        min_qubits: 2,
        max_qubits: 9,
        random_per_size: 4,
        qaoa_per_size: 1,
        ..CorpusSpec::default()
    };
    let samples = labeled(&spec);
    for s in &samples {
        assert_eq!(s.label, s.ranking.best().id());
        assert_eq!(s.ranking.options.len(), 30);
    }
    let labels: Vec<String> = samples[0].ranking.options.iter().map(|o| o.id()).collect();
    let (train, test) = split(&samples, 0.3, 4).unwrap();
    let params = ForestParams {
        n_trees: 50,
        ..ForestParams::reference()
    };
    let model = train_model(&train, &labels, &ClassifierSpec::Forest(params), 4).unwrap();

    let report = evaluate(&model, &test).unwrap();
    assert!(report.accuracy <= report.top3 && report.top3 <= 1.0);
    assert!((1..=30).contains(&report.worst_rank));
    let hist = rank_histogram(&report);
    assert!((hist.iter().map(|b| b.frequency).sum::<f64>() - 1.0).abs() < 1e-12);
    let (_, base) = majority_baseline(&train, &test).unwrap();
    assert!((0.0..=1.0).contains(&base));

    let dots = dot_rows(&model, &test).unwrap();
    assert_eq!(dots.len(), 30 * test.len());
    assert!(dots.windows(2).all(|w| w[0].num_qubits <= w[1].num_qubits));
    for chunk in dots.chunks(30) {
        assert_eq!(chunk.iter().filter(|d| d.predicted).count(), 1);
        assert!(chunk.iter().any(|d| d.normalized_score == 1.0));
    }

    // Predictions only need the extracted features.
    let c = ghz(4);
    let predicted = model.predict(&extract_features(&c, &FeatureSchema::full())).unwrap();
    assert!(labels.iter().any(|l| l == predicted));
}

#[test]
fn wide_circuit_has_twelve_feasible_dots() {
    let devices = builtin_devices();
    let options = enumerate_options(&devices).unwrap();
    let schema = FeatureSchema::full();
    let s = label_circuit(&ghz(50), &options, &devices, &schema).unwrap().unwrap();
    assert_eq!(normalize_scores(&s.ranking).iter().filter(|&&v| v > 0.0).count(), 12);
    let mut big = ghz(3);
    big.num_qubits = 200;
    assert!(label_circuit(&big, &options, &devices, &schema).unwrap().is_none());
}

#[test]
fn qasm_file_through_every_option() {
    let source = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg a[2];\nqreg b[2];\ncreg c[4];\n\
                  h a[0];\nccx a[0],a[1],b[0];\ncu1(pi/4) b[0],b[1];\nswap a[1],b[1];\nbarrier a,b;\n\
                  measure a[0] -> c[0];\nmeasure b[1] -> c[3];\n";
    let c = parse_qasm(source).unwrap();
    assert_eq!(c.num_qubits, 4);
    let again = parse_qasm(&emit_qasm(&c)).unwrap();
    assert_eq!(again, c);
    let devices = builtin_devices();
    for opt in enumerate_options(&devices).unwrap() {
        let r = compile(&c, &opt, &devices).unwrap();
        assert!(is_device_legal(&r.circuit, device_for(&opt, &devices).unwrap()), "{opt}");
        assert!(check_equivalence(&c, &r.circuit, &r.final_layout).unwrap(), "{opt}");
    }
}

#[test]
fn corpus_family_filter() {
    let spec = CorpusSpec {
        families: vec![CircuitFamily::Ghz, CircuitFamily::Dj],
        min_qubits: 2,
        max_qubits: 10,
        seed: 7,
        ..CorpusSpec::default()
    };
    let a = generate_corpus(&spec).unwrap();
    assert_eq!(a.len(), 18);
    assert_eq!(a, generate_corpus(&spec).unwrap());
    assert_eq!(a[1], ghz(3));
}
