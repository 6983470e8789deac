//! Local minimization of `⟨ψ(θ)|H|ψ(θ)⟩` over a [`ParamTemplate`].

use alloc::vec::Vec;

use core::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzError, ParamTemplate};
use crate::hamiltonian::{HamiltonianError, IsingHamiltonian};
use crate::qasm::{Circuit, Gate};
use crate::sim::{run_with_limit, SimError, Statevector, DEFAULT_MAX_QUBITS};

/// Line-search halvings tried before a point is declared stationary.
pub const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptimizerError {
    #[error(transparent)]
    Ansatz(#[from] AnsatzError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
}

/// How [`minimize`] differentiates. Both are exact; the adjoint method costs
/// a constant number of passes regardless of the parameter count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    #[default]
    Adjoint,
    ParameterShift,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub lr: f64,
    pub tol: f64,
    pub max_steps: usize,
    pub gradient: GradientMethod,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            lr: 0.1,
            tol: 1e-6,
            max_steps: 200,
            gradient: GradientMethod::Adjoint,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub theta: Vec<f64>,
    pub e_opt: f64,
    /// Accepted updates.
    pub steps: usize,
    pub converged: bool,
    /// Set when the stop callback ended the run.
    pub interrupted: bool,
    /// Energy before the first step and after each accepted step.
    pub trace: Vec<f64>,
}

/// A template paired with a Hamiltonian of matching width.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    template: &'a ParamTemplate,
    h: IsingHamiltonian,
    width: usize,
    qubit_limit: usize,
    /// Eigenvalue of every basis state, built on first use.
    diag: core::cell::OnceCell<Vec<f64>>,
}

impl<'a> Objective<'a> {
    /// Pads whichever side is narrower so both act on the same register.
    pub fn new(template: &'a ParamTemplate, h: &IsingHamiltonian) -> Result<Self, OptimizerError> {
        let width = template.skeleton.n_qubits.max(h.n_qubits);
        Ok(Self {
            template,
            h: h.pad_identities(width)?,
            width,
            qubit_limit: DEFAULT_MAX_QUBITS,
            diag: core::cell::OnceCell::new(),
        })
    }

    pub fn with_qubit_limit(mut self, limit: usize) -> Self {
        self.qubit_limit = limit;
        self
    }

    fn diag(&self) -> &[f64] {
        self.diag
            .get_or_init(|| (0..1u64 << self.width).map(|b| self.h.eigenvalue(b)).collect())
    }

    fn state_of(&self, circuit: &Circuit) -> Result<Statevector, OptimizerError> {
        Ok(run_with_limit(&circuit.widened(self.width), self.qubit_limit)?)
    }

    fn energy_of(&self, circuit: &Circuit) -> Result<f64, OptimizerError> {
        let state = self.state_of(circuit)?;
        Ok(state.amps.iter().zip(self.diag()).map(|(a, e)| a.norm_sqr() * e).sum())
    }

    pub fn value(&self, theta: &[f64]) -> Result<f64, OptimizerError> {
        self.energy_of(&self.template.bind(theta)?)
    }

    /// Parameter-shift gradient, summed over every slot sharing a parameter.
    pub fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>, OptimizerError> {
        let mut circuit = self.template.bind(theta)?;
        let mut grad = alloc::vec![0.0; theta.len()];
        for s in &self.template.slots {
            let angle = circuit.ops[s.op].params[0];
            circuit.ops[s.op].params[0] = angle + FRAC_PI_2;
            let plus = self.energy_of(&circuit)?;
            circuit.ops[s.op].params[0] = angle - FRAC_PI_2;
            let minus = self.energy_of(&circuit)?;
            circuit.ops[s.op].params[0] = angle;
            grad[s.theta] += s.scale * 0.5 * (plus - minus);
        }
        Ok(grad)
    }

    /// Exact gradient by reverse-mode differentiation through the state.
    pub fn gradient_adjoint(&self, theta: &[f64]) -> Result<Vec<f64>, OptimizerError> {
        let circuit = self.template.bind(theta)?.widened(self.width);
        let mut phi = self.state_of(&circuit)?;
        let mut lambda = phi.clone();
        for (a, e) in lambda.amps.iter_mut().zip(self.diag()) {
            *a *= e;
        }
        let mut slot_of = alloc::vec![None; circuit.ops.len()];
        for s in &self.template.slots {
            slot_of[s.op] = Some(*s);
        }
        let mut grad = alloc::vec![0.0; theta.len()];
        for (k, op) in circuit.ops.iter().enumerate().rev() {
            if let Some(s) = slot_of[k] {
                let mut mu = phi.clone();
                mu.apply_matrix(op.qubits[0], &derivative_generator(op.gate));
                let overlap: f64 = lambda
                    .amps
                    .iter()
                    .zip(&mu.amps)
                    .map(|(l, m)| (l.conj() * m).re)
                    .sum();
                grad[s.theta] += s.scale * 2.0 * overlap;
            }
            phi.apply_inverse(op);
            lambda.apply_inverse(op);
        }
        Ok(grad)
    }

    pub fn gradient_with(&self, theta: &[f64], method: GradientMethod) -> Result<Vec<f64>, OptimizerError> {
        match method {
            GradientMethod::Adjoint => self.gradient_adjoint(theta),
            GradientMethod::ParameterShift => self.gradient(theta),
        }
    }
}

/// `D` with `dU(θ)/dθ = D·U(θ)` for each rotation gate.
fn derivative_generator(gate: Gate) -> [Complex64; 4] {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let z = c(0.0, 0.0);
    match gate {
        Gate::Rx => [z, c(0.0, -0.5), c(0.0, -0.5), z],
        Gate::Ry => [z, c(-0.5, 0.0), c(0.5, 0.0), z],
        Gate::Rz => [c(0.0, -0.5), z, z, c(0.0, 0.5)],
        Gate::P => [z, z, z, c(0.0, 1.0)],
        g => panic!("{g} has no angle"),
    }
}

pub fn objective(template: &ParamTemplate, theta: &[f64], h: &IsingHamiltonian) -> Result<f64, OptimizerError> {
    Objective::new(template, h)?.value(theta)
}

pub fn gradient(template: &ParamTemplate, theta: &[f64], h: &IsingHamiltonian) -> Result<Vec<f64>, OptimizerError> {
    Objective::new(template, h)?.gradient(theta)
}

pub fn minimize(
    template: &ParamTemplate,
    theta0: &[f64],
    h: &IsingHamiltonian,
    config: &OptimizerConfig,
) -> Result<OptimizationResult, OptimizerError> {
    minimize_with(&Objective::new(template, h)?, theta0, config, &mut || false)
}

/// Gradient descent with a backtracking line search. Each step starts at
/// `config.lr` and halves until the energy strictly drops; only accepted
/// updates count as steps. Stops on `|ΔE| < tol`, on a stationary point, at
/// `max_steps`, or when `stop` returns true (checked once per step).
pub fn minimize_with(
    obj: &Objective<'_>,
    theta0: &[f64],
    config: &OptimizerConfig,
    stop: &mut dyn FnMut() -> bool,
) -> Result<OptimizationResult, OptimizerError> {
    let mut theta = theta0.to_vec();
    let mut energy = obj.value(&theta)?;
    let mut trace = alloc::vec![energy];
    let mut converged = false;
    let mut interrupted = false;

    while trace.len() <= config.max_steps {
        if stop() {
            interrupted = true;
            break;
        }
        let grad = obj.gradient_with(&theta, config.gradient)?;
        if grad.iter().all(|g| *g == 0.0) {
            converged = true;
            break;
        }
        let mut lr = config.lr;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<f64> = theta.iter().zip(&grad).map(|(t, g)| t - lr * g).collect();
            let e = obj.value(&cand)?;
            if e < energy {
                accepted = Some((cand, e));
                break;
            }
            lr *= 0.5;
        }
        let Some((cand, e)) = accepted else {
            converged = true;
            break;
        };
        let delta = energy - e;
        theta = cand;
        energy = e;
        trace.push(e);
        if delta < config.tol {
            converged = true;
            break;
        }
    }

    Ok(OptimizationResult {
        theta,
        e_opt: energy,
        steps: trace.len() - 1,
        converged,
        interrupted,
        trace,
    })
}
