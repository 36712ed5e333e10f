//! Expected-fidelity score of compiled circuits and ranking of options.
//!
//! Scores are products of per-gate and per-readout fidelities, accumulated
//! as sums of logarithms so long circuits do not underflow.

use alloc::vec::Vec;

use thiserror::Error;

use crate::circuit::{Circuit, GateKind};
use crate::compiler::{compile, CompilationOption, CompileError, CompiledResult};
use crate::devices::DeviceModel;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoreError {
    #[error("device `{device}` has no fidelity for {kind} on {qubits:?}")]
    MissingGate {
        device: alloc::string::String,
        kind: GateKind,
        qubits: Vec<usize>,
    },
    #[error("device `{device}` has no readout fidelity for qubit {qubit}")]
    MissingReadout {
        device: alloc::string::String,
        qubit: usize,
    },
    #[error("no options to rank")]
    NoOptions,
    #[error(transparent)]
    Compile(#[from] CompileError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalScore {
    /// Expected fidelity in `[0, 1]`; `0.0` iff infeasible.
    pub value: f64,
    /// `ln(value)`; `-inf` iff infeasible.
    pub log_value: f64,
    pub feasible: bool,
}

impl EvalScore {
    pub const INFEASIBLE: EvalScore = EvalScore {
        value: 0.0,
        log_value: f64::NEG_INFINITY,
        feasible: false,
    };

    pub fn from_log(log_value: f64) -> EvalScore {
        EvalScore {
            value: libm::exp(log_value),
            log_value,
            feasible: true,
        }
    }
}

/// Product of the calibrated fidelity of every gate on its exact qubit tuple
/// and of every measured qubit's readout fidelity. Barriers are free.
pub fn score_circuit(c: &Circuit, d: &DeviceModel) -> Result<EvalScore, ScoreError> {
    let mut log = 0.0;
    for op in &c.ops {
        match op.kind {
            GateKind::Barrier => {}
            GateKind::Measure => {
                let q = op.qubits[0];
                let f = d.calib.readout(q).ok_or_else(|| ScoreError::MissingReadout {
                    device: d.id.clone(),
                    qubit: q,
                })?;
                log += libm::log(f);
            }
            kind => {
                let f = d.calib.gate(kind, &op.qubits).ok_or_else(|| ScoreError::MissingGate {
                    device: d.id.clone(),
                    kind,
                    qubits: op.qubits.clone(),
                })?;
                log += libm::log(f);
            }
        }
    }
    Ok(EvalScore::from_log(log))
}

/// Score of a compilation outcome; `None` stands for an infeasible or timed
/// out option.
pub fn evaluate_score(r: Option<&CompiledResult>, d: &DeviceModel) -> Result<EvalScore, ScoreError> {
    match r {
        Some(r) => score_circuit(&r.circuit, d),
        None => Ok(EvalScore::INFEASIBLE),
    }
}

/// Scores of every option for one circuit, in a total order.
#[derive(Clone, Debug, PartialEq)]
pub struct OptionRanking {
    pub options: Vec<CompilationOption>,
    /// Parallel to `options`.
    pub scores: Vec<EvalScore>,
    /// Option indices, best first.
    pub order: Vec<usize>,
    /// 1-based rank of each option, parallel to `options`.
    pub rank_of: Vec<usize>,
}

impl OptionRanking {
    pub fn best(&self) -> &CompilationOption {
        &self.options[self.order[0]]
    }

    pub fn index_of(&self, option_id: &str) -> Option<usize> {
        self.options.iter().position(|o| o.id() == option_id)
    }

    pub fn rank_of_id(&self, option_id: &str) -> Option<usize> {
        self.index_of(option_id).map(|i| self.rank_of[i])
    }

    pub fn any_feasible(&self) -> bool {
        self.scores.iter().any(|s| s.feasible)
    }
}

/// Orders options by descending log-score; ties keep option order.
pub fn rank_scores(
    options: Vec<CompilationOption>,
    scores: Vec<EvalScore>,
) -> Result<OptionRanking, ScoreError> {
    if options.is_empty() {
        return Err(ScoreError::NoOptions);
    }
    assert_eq!(options.len(), scores.len(), "one score per option");
    let mut order: Vec<usize> = (0..options.len()).collect();
    // Stable sort keeps option order among equal scores.
    order.sort_by(|&a, &b| scores[b].log_value.total_cmp(&scores[a].log_value));
    let mut rank_of = alloc::vec![0; options.len()];
    for (rank, &i) in order.iter().enumerate() {
        rank_of[i] = rank + 1;
    }
    Ok(OptionRanking {
        options,
        scores,
        order,
        rank_of,
    })
}

/// Compiles and scores `c` under every option. Options on devices that are
/// too small get the infeasible score.
pub fn rank_options(
    c: &Circuit,
    options: &[CompilationOption],
    devices: &[DeviceModel],
) -> Result<OptionRanking, ScoreError> {
    let scores = options
        .iter()
        .map(|opt| score_option(c, opt, devices))
        .collect::<Result<Vec<_>, _>>()?;
    rank_scores(options.to_vec(), scores)
}

/// Compiles and scores one option.
pub fn score_option(
    c: &Circuit,
    opt: &CompilationOption,
    devices: &[DeviceModel],
) -> Result<EvalScore, ScoreError> {
    match compile(c, opt, devices) {
        Ok(r) => {
            let d = crate::compiler::device_for(opt, devices)?;
            evaluate_score(Some(&r), d)
        }
        Err(CompileError::Infeasible { .. }) => Ok(EvalScore::INFEASIBLE),
        Err(e) => Err(e.into()),
    }
}

/// Scores relative to the best option (best = 1.0); infeasible options and
/// all-infeasible rankings give 0.0.
pub fn normalize_scores(r: &OptionRanking) -> Vec<f64> {
    let max = r
        .scores
        .iter()
        .filter(|s| s.feasible)
        .map(|s| s.log_value)
        .fold(f64::NEG_INFINITY, f64::max);
    r.scores
        .iter()
        .map(|s| if s.feasible { libm::exp(s.log_value - max) } else { 0.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{enumerate_options, Setting};
    use crate::devices::{builtin_devices, DeviceDescriptor, Defaults, Overrides, Technology};
    use alloc::vec;

    fn toy_device() -> DeviceModel {
        DeviceModel::from_descriptor(&DeviceDescriptor {
            id: "toy".into(),
            technology: Technology::Superconducting,
            num_qubits: 2,
            coupling: vec![[0, 1], [1, 0]],
            native_gates: vec![GateKind::Rz, GateKind::Sx, GateKind::X, GateKind::Cx, GateKind::Measure],
            defaults: Defaults {
                single_qubit: Some(0.99),
                two_qubit: Some(0.99),
                readout: Some(0.98),
            },
            overrides: Overrides::default(),
            coherence: None,
        })
        .unwrap()
    }

    #[test]
    fn direct_products() {
        let d = toy_device();
        assert_eq!(score_circuit(&Circuit::new(2, 0), &d).unwrap().value, 1.0);
        let mut c = Circuit::new(2, 1);
        c.apply(GateKind::X, &[0], &[]).apply(GateKind::Cx, &[0, 1], &[]).measure(1, 0);
        let s = score_circuit(&c, &d).unwrap();
        assert!((s.value - 0.99 * 0.99 * 0.98).abs() < 1e-12);
        assert!((s.value - 0.960498).abs() < 1e-12);
        assert!(s.feasible);
    }

    #[test]
    fn missing_entries_are_errors() {
        let d = toy_device();
        let mut c = Circuit::new(2, 0);
        c.apply(GateKind::H, &[0], &[]);
        assert!(matches!(score_circuit(&c, &d), Err(ScoreError::MissingGate { .. })));
    }

    #[test]
    fn infeasible_is_worst() {
        assert_eq!(evaluate_score(None, &toy_device()).unwrap(), EvalScore::INFEASIBLE);
        let fleet = builtin_devices();
        let opts = enumerate_options(&fleet).unwrap();
        let mut wide = Circuit::new(50, 50);
        wide.apply(GateKind::H, &[0], &[]).measure_all();
        let r = rank_options(&wide, &opts, &fleet).unwrap();
        assert_eq!(r.scores.iter().filter(|s| s.feasible).count(), 12);
        assert!(r.scores.iter().filter(|s| !s.feasible).all(|s| s.value == 0.0));
    }

    #[test]
    fn all_infeasible_ranks_by_option_order() {
        let fleet = builtin_devices();
        let opts = enumerate_options(&fleet).unwrap();
        let r = rank_options(&Circuit::new(200, 0), &opts, &fleet).unwrap();
        assert_eq!(r.order, (0..30).collect::<Vec<_>>());
        assert_eq!(r.rank_of, (1..=30).collect::<Vec<_>>());
        assert!(normalize_scores(&r).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ranking_ties_and_normalization() {
        let opts: Vec<CompilationOption> = ["a", "b", "c"]
            .iter()
            .map(|d| CompilationOption::new(*d, Setting::O1))
            .collect();
        let s = |v: f64| EvalScore::from_log(libm::log(v));
        let r = rank_scores(opts.clone(), vec![s(0.25), s(0.5), s(0.25)]).unwrap();
        assert_eq!(r.order, vec![1, 0, 2]);
        assert_eq!(r.rank_of, vec![2, 1, 3]);
        assert_eq!(r.best().device_id, "b");
        let n = normalize_scores(&r);
        assert!((n[0] - 0.5).abs() < 1e-15 && n[1] == 1.0);
        let single = rank_scores(opts[..1].to_vec(), vec![s(0.3)]).unwrap();
        assert_eq!(normalize_scores(&single), vec![1.0]);
        assert_eq!(rank_scores(Vec::new(), Vec::new()), Err(ScoreError::NoOptions));
    }

    #[test]
    fn ghz_scores_all_thirty() {
        let fleet = builtin_devices();
        let opts = enumerate_options(&fleet).unwrap();
        let mut c = Circuit::new(3, 3);
        c.apply(GateKind::H, &[0], &[])
            .apply(GateKind::Cx, &[0, 1], &[])
            .apply(GateKind::Cx, &[1, 2], &[])
            .measure_all();
        let r = rank_options(&c, &opts, &fleet).unwrap();
        assert_eq!(r.scores.len(), 30);
        assert!(r.scores.iter().all(|s| s.feasible && s.value > 0.0 && s.value <= 1.0));
        assert_eq!(r.rank_of[r.order[0]], 1);
    }
}
