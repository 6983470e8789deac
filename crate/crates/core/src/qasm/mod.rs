//! OpenQASM 3.0 subset: circuit model, parser and canonical emitter.
//!
//! The accepted language is deliberately small. A program starts with
//! `OPENQASM 3;` (or `3.0`), may include `"stdgates.inc"`, declares at most one
//! qubit register and one bit register, and then lists gate calls from a fixed
//! set of sixteen standard gates, `measure` statements and `barrier`s. Gate
//! angles are constant expressions over numeric literals and `pi`.

mod emit;
mod lexer;
mod parser;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use emit::emit;
pub use parser::parse;

/// The supported gate set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gate {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    Rx,
    Ry,
    Rz,
    P,
    Cx,
    Cz,
    Swap,
    Ccx,
}

impl Gate {
    pub const ALL: [Gate; 16] = [
        Gate::H,
        Gate::X,
        Gate::Y,
        Gate::Z,
        Gate::S,
        Gate::Sdg,
        Gate::T,
        Gate::Tdg,
        Gate::Rx,
        Gate::Ry,
        Gate::Rz,
        Gate::P,
        Gate::Cx,
        Gate::Cz,
        Gate::Swap,
        Gate::Ccx,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Gate::H => "h",
            Gate::X => "x",
            Gate::Y => "y",
            Gate::Z => "z",
            Gate::S => "s",
            Gate::Sdg => "sdg",
            Gate::T => "t",
            Gate::Tdg => "tdg",
            Gate::Rx => "rx",
            Gate::Ry => "ry",
            Gate::Rz => "rz",
            Gate::P => "p",
            Gate::Cx => "cx",
            Gate::Cz => "cz",
            Gate::Swap => "swap",
            Gate::Ccx => "ccx",
        }
    }

    pub fn from_name(name: &str) -> Option<Gate> {
        Gate::ALL.iter().copied().find(|g| g.name() == name)
    }

    /// Number of qubit operands.
    pub fn num_qubits(self) -> usize {
        match self {
            Gate::Cx | Gate::Cz | Gate::Swap => 2,
            Gate::Ccx => 3,
            _ => 1,
        }
    }

    /// Number of angle parameters.
    pub fn num_params(self) -> usize {
        if self.is_rotation() {
            1
        } else {
            0
        }
    }

    /// Single-qubit gates with one angle: `rx`, `ry`, `rz` and `p`.
    pub fn is_rotation(self) -> bool {
        matches!(self, Gate::Rx | Gate::Ry | Gate::Rz | Gate::P)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One gate application.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub gate: Gate,
    pub qubits: Vec<usize>,
    pub params: Vec<f64>,
}

impl GateOp {
    pub fn new(gate: Gate, qubits: &[usize], params: &[f64]) -> Self {
        Self {
            gate,
            qubits: qubits.to_vec(),
            params: params.to_vec(),
        }
    }

    pub fn is_multi_qubit(&self) -> bool {
        self.qubits.len() > 1
    }
}

/// A parsed program: one qubit register, one bit register, ordered gates and
/// measurements. Measurements do not affect simulation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    pub n_qubits: usize,
    pub n_clbits: usize,
    pub ops: Vec<GateOp>,
    /// `(qubit, clbit)` pairs in source order.
    pub measures: Vec<(usize, usize)>,
}

/// A structural violation found by [`Circuit::validate`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CircuitError {
    #[error("op {op}: qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange {
        op: usize,
        index: usize,
        n_qubits: usize,
    },
    #[error("op {op}: `{gate}` expects {expected} operands, got {got}")]
    Arity {
        op: usize,
        gate: Gate,
        expected: usize,
        got: usize,
    },
    #[error("op {op}: `{gate}` expects {expected} parameters, got {got}")]
    ParamCount {
        op: usize,
        gate: Gate,
        expected: usize,
        got: usize,
    },
    #[error("op {op}: repeated operand {index}")]
    RepeatedOperand { op: usize, index: usize },
    #[error("op {op}: non-finite angle")]
    NonFiniteAngle { op: usize },
    #[error("measure {index}: qubit {qubit} / bit {clbit} out of range")]
    MeasureOutOfRange {
        index: usize,
        qubit: usize,
        clbit: usize,
    },
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            ..Self::default()
        }
    }

    pub fn push(&mut self, gate: Gate, qubits: &[usize], params: &[f64]) -> &mut Self {
        self.ops.push(GateOp::new(gate, qubits, params));
        self
    }

    /// Checks every structural invariant the parser guarantees.
    pub fn validate(&self) -> Result<(), CircuitError> {
        for (i, op) in self.ops.iter().enumerate() {
            let gate = op.gate;
            if op.qubits.len() != gate.num_qubits() {
                return Err(CircuitError::Arity {
                    op: i,
                    gate,
                    expected: gate.num_qubits(),
                    got: op.qubits.len(),
                });
            }
            if op.params.len() != gate.num_params() {
                return Err(CircuitError::ParamCount {
                    op: i,
                    gate,
                    expected: gate.num_params(),
                    got: op.params.len(),
                });
            }
            if op.params.iter().any(|p| !p.is_finite()) {
                return Err(CircuitError::NonFiniteAngle { op: i });
            }
            for (j, &q) in op.qubits.iter().enumerate() {
                if q >= self.n_qubits {
                    return Err(CircuitError::QubitOutOfRange {
                        op: i,
                        index: q,
                        n_qubits: self.n_qubits,
                    });
                }
                if op.qubits[..j].contains(&q) {
                    return Err(CircuitError::RepeatedOperand { op: i, index: q });
                }
            }
        }
        for (i, &(qubit, clbit)) in self.measures.iter().enumerate() {
            if qubit >= self.n_qubits || clbit >= self.n_clbits {
                return Err(CircuitError::MeasureOutOfRange {
                    index: i,
                    qubit,
                    clbit,
                });
            }
        }
        Ok(())
    }

    /// Same circuit on `n` qubits; the added qubits stay idle in `|0⟩`.
    pub fn widened(&self, n: usize) -> Circuit {
        let mut c = self.clone();
        c.n_qubits = c.n_qubits.max(n);
        c
    }
}

/// Number of multi-qubit gates with operands on both sides of the `k` boundary.
pub fn count_cross_register_gates(circuit: &Circuit, k: usize) -> usize {
    circuit
        .ops
        .iter()
        .filter(|op| op.is_multi_qubit())
        .filter(|op| op.qubits.iter().any(|&q| q < k) && op.qubits.iter().any(|&q| q >= k))
        .count()
}

/// Number of distinct qubits `>= k` touched by at least one gate.
pub fn count_active_extra_qubits(circuit: &Circuit, k: usize) -> usize {
    let mut active: Vec<usize> = circuit
        .ops
        .iter()
        .flat_map(|op| op.qubits.iter().copied())
        .filter(|&q| q >= k)
        .collect();
    active.sort_unstable();
    active.dedup();
    active.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lexical,
    Syntactic,
    Semantic,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Lexical => "lexical",
            ParseErrorKind::Syntactic => "syntactic",
            ParseErrorKind::Semantic => "semantic",
        })
    }
}

/// Parse failure with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind} error at {line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub kind: ParseErrorKind,
}
