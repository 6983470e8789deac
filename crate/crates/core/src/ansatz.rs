//! Parameterized circuits: QAOA and hardware-efficient VQE builders, and the
//! slot template used to rebind angles of any circuit.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::hamiltonian::IsingHamiltonian;
use crate::qasm::{Circuit, Gate};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnsatzError {
    #[error("expected {expected} parameters, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("ansatz needs at least one qubit")]
    NoQubits,
}

/// Which ground-truth ansatz family produced a circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Qaoa,
    Vqe,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Qaoa => "qaoa",
            Method::Vqe => "vqe",
        }
    }
}

impl core::fmt::Display for Method {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Method {
    type Err = alloc::string::String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "qaoa" => Ok(Method::Qaoa),
            "vqe" => Ok(Method::Vqe),
            _ => Err(alloc::format!("unknown method `{s}` (expected qaoa or vqe)")),
        }
    }
}

/// One bound angle: `skeleton.ops[op].params[0] = scale * θ[theta]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slot {
    pub op: usize,
    pub theta: usize,
    pub scale: f64,
}

/// A circuit whose rotation angles are functions of a parameter vector.
/// Several slots may share one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamTemplate {
    pub skeleton: Circuit,
    pub slots: Vec<Slot>,
    pub theta_len: usize,
}

impl ParamTemplate {
    /// Fills every slot from `theta`.
    pub fn bind(&self, theta: &[f64]) -> Result<Circuit, AnsatzError> {
        if theta.len() != self.theta_len {
            return Err(AnsatzError::LengthMismatch {
                expected: self.theta_len,
                got: theta.len(),
            });
        }
        let mut c = self.skeleton.clone();
        for s in &self.slots {
            c.ops[s.op].params[0] = s.scale * theta[s.theta];
        }
        Ok(c)
    }
}

/// Every rotation angle becomes its own unit-scale slot, in source order.
pub fn extract(circuit: &Circuit) -> (ParamTemplate, Vec<f64>) {
    let mut slots = Vec::new();
    let mut theta = Vec::new();
    for (i, op) in circuit.ops.iter().enumerate() {
        if op.gate.is_rotation() {
            slots.push(Slot {
                op: i,
                theta: theta.len(),
                scale: 1.0,
            });
            theta.push(op.params[0]);
        }
    }
    let template = ParamTemplate {
        skeleton: circuit.clone(),
        theta_len: theta.len(),
        slots,
    };
    (template, theta)
}

pub fn bind(template: &ParamTemplate, theta: &[f64]) -> Result<Circuit, AnsatzError> {
    template.bind(theta)
}

/// QAOA with `θ = [γ_1..γ_p, β_1..β_p]`. Each cost term `c·Z_S` compiles to a
/// CX ladder onto the highest qubit of `S`, `rz(2cγ)`, and the reverse ladder.
/// The mixer is `rx(2β)` on every qubit. The constant offset is dropped.
pub fn qaoa_template(h: &IsingHamiltonian, layers: usize) -> Result<ParamTemplate, AnsatzError> {
    let n = h.n_qubits;
    if n == 0 {
        return Err(AnsatzError::NoQubits);
    }
    let mut c = Circuit::new(n);
    let mut slots = Vec::new();
    for q in 0..n {
        c.push(Gate::H, &[q], &[]);
    }
    for l in 0..layers {
        for (qs, coeff) in h.terms() {
            for w in qs.windows(2) {
                c.push(Gate::Cx, &[w[0], w[1]], &[]);
            }
            slots.push(Slot {
                op: c.ops.len(),
                theta: l,
                scale: 2.0 * coeff,
            });
            c.push(Gate::Rz, &[qs[qs.len() - 1]], &[0.0]);
            for w in qs.windows(2).rev() {
                c.push(Gate::Cx, &[w[0], w[1]], &[]);
            }
        }
        for q in 0..n {
            slots.push(Slot {
                op: c.ops.len(),
                theta: layers + l,
                scale: 2.0,
            });
            c.push(Gate::Rx, &[q], &[0.0]);
        }
    }
    Ok(ParamTemplate {
        skeleton: c,
        slots,
        theta_len: 2 * layers,
    })
}

pub fn qaoa_circuit(
    h: &IsingHamiltonian,
    layers: usize,
    gamma: &[f64],
    beta: &[f64],
) -> Result<Circuit, AnsatzError> {
    for got in [gamma.len(), beta.len()] {
        if got != layers {
            return Err(AnsatzError::LengthMismatch {
                expected: layers,
                got,
            });
        }
    }
    let theta: Vec<f64> = gamma.iter().chain(beta).copied().collect();
    qaoa_template(h, layers)?.bind(&theta)
}

/// Hadamard layer, then per layer `ry(θ[l·n + i])` on each qubit followed by
/// the chain `cx(i, i+1)`.
pub fn vqe_template(n_qubits: usize, layers: usize) -> Result<ParamTemplate, AnsatzError> {
    if n_qubits == 0 {
        return Err(AnsatzError::NoQubits);
    }
    let mut c = Circuit::new(n_qubits);
    let mut slots = Vec::new();
    for q in 0..n_qubits {
        c.push(Gate::H, &[q], &[]);
    }
    for l in 0..layers {
        for q in 0..n_qubits {
            slots.push(Slot {
                op: c.ops.len(),
                theta: l * n_qubits + q,
                scale: 1.0,
            });
            c.push(Gate::Ry, &[q], &[0.0]);
        }
        for q in 0..n_qubits.saturating_sub(1) {
            c.push(Gate::Cx, &[q, q + 1], &[]);
        }
    }
    Ok(ParamTemplate {
        skeleton: c,
        slots,
        theta_len: n_qubits * layers,
    })
}

pub fn vqe_circuit(n_qubits: usize, layers: usize, theta: &[f64]) -> Result<Circuit, AnsatzError> {
    vqe_template(n_qubits, layers)?.bind(theta)
}
