//! Gate-list circuit representation.
//!
//! A [`Circuit`] is an ordered list of [`Instruction`]s over flat qubit and
//! classical-bit index spaces. The gate vocabulary is the OpenQASM 2.0
//! standard header (`qelib1.inc`) plus `measure` and `barrier`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

macro_rules! gate_kinds {
    ($( $variant:ident => $name:literal, $qubits:expr, $params:expr; )*) => {
        /// Every operation kind the IR understands.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "lowercase")]
        pub enum GateKind {
            $( $variant, )*
        }

        impl GateKind {
            /// All kinds in canonical order. Gate-count features follow this order.
            pub const ALL: &'static [GateKind] = &[$( GateKind::$variant, )*];

            /// The OpenQASM 2.0 identifier.
            pub fn name(self) -> &'static str {
                match self { $( GateKind::$variant => $name, )* }
            }

            /// Number of qubit operands; `None` for the variadic `barrier`.
            pub fn arity(self) -> Option<usize> {
                match self { $( GateKind::$variant => $qubits, )* }
            }

            /// Number of real parameters.
            pub fn num_params(self) -> usize {
                match self { $( GateKind::$variant => $params, )* }
            }
        }
    };
}

gate_kinds! {
    Id => "id", Some(1), 0;
    X => "x", Some(1), 0;
    Y => "y", Some(1), 0;
    Z => "z", Some(1), 0;
    H => "h", Some(1), 0;
    S => "s", Some(1), 0;
    Sdg => "sdg", Some(1), 0;
    T => "t", Some(1), 0;
    Tdg => "tdg", Some(1), 0;
    Sx => "sx", Some(1), 0;
    Sxdg => "sxdg", Some(1), 0;
    Rx => "rx", Some(1), 1;
    Ry => "ry", Some(1), 1;
    Rz => "rz", Some(1), 1;
    P => "p", Some(1), 1;
    U1 => "u1", Some(1), 1;
    U2 => "u2", Some(1), 2;
    U3 => "u3", Some(1), 3;
    U => "u", Some(1), 3;
    Cx => "cx", Some(2), 0;
    Cy => "cy", Some(2), 0;
    Cz => "cz", Some(2), 0;
    Ch => "ch", Some(2), 0;
    Swap => "swap", Some(2), 0;
    Crx => "crx", Some(2), 1;
    Cry => "cry", Some(2), 1;
    Crz => "crz", Some(2), 1;
    Cp => "cp", Some(2), 1;
    Cu1 => "cu1", Some(2), 1;
    Cu3 => "cu3", Some(2), 3;
    Csx => "csx", Some(2), 0;
    Rxx => "rxx", Some(2), 1;
    Rzz => "rzz", Some(2), 1;
    Ccx => "ccx", Some(3), 0;
    Cswap => "cswap", Some(3), 0;
    Measure => "measure", Some(1), 0;
    Barrier => "barrier", None, 0;
}

impl GateKind {
    /// True for unitary gates (everything except `measure` and `barrier`).
    pub fn is_gate(self) -> bool {
        !matches!(self, GateKind::Measure | GateKind::Barrier)
    }

    /// True for unitary gates acting on two or more qubits.
    pub fn is_multi_qubit(self) -> bool {
        self.is_gate() && self.arity().unwrap_or(0) >= 2
    }

    /// Gate kinds that can appear as `count_*` features (unitary gates only).
    pub fn countable() -> impl Iterator<Item = GateKind> {
        Self::ALL.iter().copied().filter(|k| k.is_gate())
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown gate kind `{0}`")]
pub struct UnknownGate(pub String);

impl FromStr for GateKind {
    type Err = UnknownGate;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GateKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownGate(s.into()))
    }
}

/// One operation in a circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instruction {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub params: Vec<f64>,
    /// Classical target; only set for `measure`.
    pub clbit: Option<usize>,
}

impl Instruction {
    pub fn gate(kind: GateKind, qubits: &[usize], params: &[f64]) -> Self {
        Instruction {
            kind,
            qubits: qubits.to_vec(),
            params: params.to_vec(),
            clbit: None,
        }
    }

    pub fn measure(qubit: usize, clbit: usize) -> Self {
        Instruction {
            kind: GateKind::Measure,
            qubits: alloc::vec![qubit],
            params: Vec::new(),
            clbit: Some(clbit),
        }
    }

    pub fn barrier(qubits: &[usize]) -> Self {
        Instruction::gate(GateKind::Barrier, qubits, &[])
    }

    /// Checks arity, parameter count, operand distinctness and index ranges.
    pub fn validate(&self, num_qubits: usize, num_clbits: usize) -> Result<(), CircuitError> {
        let kind = self.kind;
        match kind.arity() {
            Some(n) if n != self.qubits.len() => {
                return Err(CircuitError::Arity {
                    gate: kind,
                    expected: n,
                    found: self.qubits.len(),
                })
            }
            None if self.qubits.is_empty() => {
                return Err(CircuitError::Arity {
                    gate: kind,
                    expected: 1,
                    found: 0,
                })
            }
            _ => {}
        }
        if self.params.len() != kind.num_params() {
            return Err(CircuitError::ParamCount {
                gate: kind,
                expected: kind.num_params(),
                found: self.params.len(),
            });
        }
        for (i, &q) in self.qubits.iter().enumerate() {
            if q >= num_qubits {
                return Err(CircuitError::QubitOutOfRange { qubit: q, num_qubits });
            }
            if self.qubits[..i].contains(&q) {
                return Err(CircuitError::DuplicateOperand { gate: kind, qubit: q });
            }
        }
        match (kind, self.clbit) {
            (GateKind::Measure, Some(c)) if c >= num_clbits => {
                Err(CircuitError::ClbitOutOfRange { clbit: c, num_clbits })
            }
            (GateKind::Measure, None) => Err(CircuitError::MissingClbit),
            (GateKind::Measure, Some(_)) => Ok(()),
            (_, Some(_)) => Err(CircuitError::UnexpectedClbit { gate: kind }),
            (_, None) => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("gate `{gate}` takes {expected} qubit(s), got {found}")]
    Arity {
        gate: GateKind,
        expected: usize,
        found: usize,
    },
    #[error("gate `{gate}` takes {expected} parameter(s), got {found}")]
    ParamCount {
        gate: GateKind,
        expected: usize,
        found: usize,
    },
    #[error("gate `{gate}` repeats qubit {qubit}")]
    DuplicateOperand { gate: GateKind, qubit: usize },
    #[error("qubit {qubit} out of range for {num_qubits} qubit(s)")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("clbit {clbit} out of range for {num_clbits} clbit(s)")]
    ClbitOutOfRange { clbit: usize, num_clbits: usize },
    #[error("measure without classical target")]
    MissingClbit,
    #[error("gate `{gate}` cannot carry a classical target")]
    UnexpectedClbit { gate: GateKind },
}

/// Ordered gate list over flat qubit/clbit index spaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub name: String,
    pub num_qubits: usize,
    pub num_clbits: usize,
    pub ops: Vec<Instruction>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Self {
        Circuit {
            name: String::new(),
            num_qubits,
            num_clbits,
            ops: Vec::new(),
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Appends after validating against the register sizes.
    pub fn push(&mut self, inst: Instruction) -> Result<(), CircuitError> {
        inst.validate(self.num_qubits, self.num_clbits)?;
        self.ops.push(inst);
        Ok(())
    }

    /// Appends a gate, panicking on malformed input. For generators and tests
    /// whose operands are correct by construction.
    pub fn apply(&mut self, kind: GateKind, qubits: &[usize], params: &[f64]) -> &mut Self {
        self.push(Instruction::gate(kind, qubits, params))
            .expect("malformed instruction");
        self
    }

    pub fn measure(&mut self, qubit: usize, clbit: usize) -> &mut Self {
        self.push(Instruction::measure(qubit, clbit))
            .expect("malformed measurement");
        self
    }

    /// Measures qubit i into clbit i for every qubit, growing the classical
    /// register if needed.
    pub fn measure_all(&mut self) -> &mut Self {
        self.num_clbits = self.num_clbits.max(self.num_qubits);
        for q in 0..self.num_qubits {
            self.measure(q, q);
        }
        self
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        self.ops
            .iter()
            .try_for_each(|op| op.validate(self.num_qubits, self.num_clbits))
    }

    /// Number of unitary gates (measurements and barriers excluded).
    pub fn gate_count(&self) -> usize {
        self.ops.iter().filter(|op| op.kind.is_gate()).count()
    }

    pub fn count_kind(&self, kind: GateKind) -> usize {
        self.ops.iter().filter(|op| op.kind == kind).count()
    }

    /// Copy with measurements and barriers removed.
    pub fn without_directives(&self) -> Circuit {
        Circuit {
            name: self.name.clone(),
            num_qubits: self.num_qubits,
            num_clbits: self.num_clbits,
            ops: self
                .ops
                .iter()
                .filter(|op| op.kind.is_gate())
                .cloned()
                .collect(),
        }
    }

    /// Pairs `(qubit, clbit)` for every measurement, in program order.
    pub fn measurements(&self) -> Vec<(usize, usize)> {
        self.ops
            .iter()
            .filter(|op| op.kind == GateKind::Measure)
            .filter_map(|op| op.clbit.map(|c| (op.qubits[0], c)))
            .collect()
    }

    /// Qubits touched by at least one instruction, ascending.
    pub fn active_qubits(&self) -> Vec<usize> {
        let mut seen = alloc::vec![false; self.num_qubits];
        for op in &self.ops {
            for &q in &op.qubits {
                seen[q] = true;
            }
        }
        (0..self.num_qubits).filter(|&q| seen[q]).collect()
    }

    /// Copy with every qubit index sent through `map` onto a register of
    /// `num_qubits` qubits.
    pub fn remapped(&self, num_qubits: usize, map: impl Fn(usize) -> usize) -> Circuit {
        Circuit {
            name: self.name.clone(),
            num_qubits,
            num_clbits: self.num_clbits,
            ops: self
                .ops
                .iter()
                .map(|op| Instruction {
                    qubits: op.qubits.iter().map(|&q| map(q)).collect(),
                    ..op.clone()
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for &k in GateKind::ALL {
            assert_eq!(k.name().parse::<GateKind>().unwrap(), k);
        }
        assert!("foo".parse::<GateKind>().is_err());
    }

    #[test]
    fn rejects_repeated_operand() {
        let mut c = Circuit::new(2, 0);
        let err = c.push(Instruction::gate(GateKind::Cx, &[0, 0], &[])).unwrap_err();
        assert!(matches!(err, CircuitError::DuplicateOperand { .. }));
    }

    #[test]
    fn rejects_wrong_param_count() {
        let mut c = Circuit::new(1, 0);
        assert!(c.push(Instruction::gate(GateKind::U3, &[0], &[1.0])).is_err());
        assert!(c.push(Instruction::gate(GateKind::H, &[0], &[1.0])).is_err());
    }

    #[test]
    fn measure_needs_clbit_in_range() {
        let mut c = Circuit::new(1, 1);
        assert!(c.push(Instruction::measure(0, 1)).is_err());
        assert!(c.push(Instruction::measure(0, 0)).is_ok());
    }

    #[test]
    fn gate_count_skips_directives() {
        let mut c = Circuit::new(2, 2);
        c.apply(GateKind::H, &[0], &[]);
        c.push(Instruction::barrier(&[0, 1])).unwrap();
        c.measure_all();
        assert_eq!(c.gate_count(), 1);
        assert_eq!(c.without_directives().ops.len(), 1);
    }
}
