//! Ground-truth task records: generation from random instances, validation,
//! and conversion into reward [`Task`]s.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ansatz::{qaoa_template, vqe_template, AnsatzError, Method, ParamTemplate};
use crate::hamiltonian::{to_ising, HamiltonianError, IsingHamiltonian};
use crate::optimizer::{minimize_with, Objective, OptimizationResult, OptimizerConfig, OptimizerError};
use crate::problems::{build_problem, random_instance, Graph, ProblemError, ProblemInstance, ProblemKind, ProblemParams};
use crate::qasm::{emit, parse, Circuit};
use crate::reward::{Task, TaskError};
use crate::rng::{derive_seed, seeded, uniform_angle};
use crate::sim::{distribution, run_with_limit, DEFAULT_MAX_QUBITS};

pub const SCHEMA_VERSION: u32 = 1;
/// Tolerance for stored energies against recomputed ones.
pub const ENERGY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub qaoa_layers: usize,
    pub vqe_layers: usize,
    /// Largest normalized energy a record may have.
    pub f_threshold: f64,
    /// Seeded starting points tried before an instance is rejected.
    pub restarts: usize,
    pub max_qubits: usize,
    pub optimizer: OptimizerConfig,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            qaoa_layers: 2,
            vqe_layers: 2,
            f_threshold: 0.1,
            restarts: 8,
            max_qubits: 12,
            optimizer: OptimizerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("instance has {n_vars} variables, above the qubit cap {cap}")]
    TooLarge { n_vars: usize, cap: usize },
    #[error("unsupported schema version {0}")]
    Version(u32),
    #[error("record {id}: {message}")]
    Invalid { id: String, message: String },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Ansatz(#[from] AnsatzError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    Task(#[from] TaskError),
}

/// One ground-truth task, stored as a line of a JSONL dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub v: u32,
    pub id: String,
    pub kind: ProblemKind,
    pub graph: Graph,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph2: Option<Graph>,
    #[serde(default)]
    pub params: ProblemParams,
    pub hamiltonian: IsingHamiltonian,
    pub qasm_gt: String,
    pub method: Method,
    pub layers: usize,
    pub e_min: f64,
    pub e_max: f64,
    pub n_qubits: usize,
    pub optimal_params: Vec<f64>,
    pub final_expectation: f64,
    pub steps: usize,
    pub seed: u64,
}

impl TaskRecord {
    pub fn normalized_energy(&self) -> f64 {
        let span = self.e_max - self.e_min;
        if span > 0.0 {
            (self.final_expectation - self.e_min) / span
        } else {
            0.0
        }
    }

    pub fn to_task(&self) -> Result<Task, TaskError> {
        Task::from_qasm(self.hamiltonian.clone(), &self.qasm_gt, self.e_min, self.e_max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GenOutcome {
    Accepted(Box<TaskRecord>),
    Rejected { id: String, reason: String },
}

impl GenOutcome {
    pub fn accepted(self) -> Option<TaskRecord> {
        match self {
            GenOutcome::Accepted(r) => Some(*r),
            GenOutcome::Rejected { .. } => None,
        }
    }
}

pub fn record_id(kind: ProblemKind, n: usize, seed: u64, method: Method) -> String {
    format!("{kind}-n{n}-s{seed}-{method}")
}

pub fn ansatz_template(h: &IsingHamiltonian, method: Method, config: &DatasetConfig) -> Result<(ParamTemplate, usize), AnsatzError> {
    Ok(match method {
        Method::Qaoa => (qaoa_template(h, config.qaoa_layers)?, config.qaoa_layers),
        Method::Vqe => (vqe_template(h.n_qubits, config.vqe_layers)?, config.vqe_layers),
    })
}

/// Random instance of `kind` on `n` nodes, then [`generate_from_instance`].
pub fn generate_record(
    kind: ProblemKind,
    n: usize,
    seed: u64,
    method: Method,
    config: &DatasetConfig,
) -> Result<GenOutcome, DatasetError> {
    let instance = random_instance(kind, n, seed)?;
    generate_from_instance(&instance, &record_id(kind, n, seed, method), seed, method, config)
}

/// Builds the Hamiltonian, optimizes the ansatz from seeded starting points
/// drawn uniformly from `(-π, π]`, and accepts the first run that converges
/// with normalized energy at most `f_threshold`.
pub fn generate_from_instance(
    instance: &ProblemInstance,
    id: &str,
    seed: u64,
    method: Method,
    config: &DatasetConfig,
) -> Result<GenOutcome, DatasetError> {
    let n_vars = instance.n_vars();
    if n_vars > config.max_qubits {
        return Err(DatasetError::TooLarge {
            n_vars,
            cap: config.max_qubits,
        });
    }
    let reject = |reason: String| {
        Ok(GenOutcome::Rejected {
            id: id.into(),
            reason,
        })
    };
    let h = to_ising(&instance.poly);
    if h.is_constant() {
        return reject("constant Hamiltonian has a degenerate spectrum".into());
    }
    let (e_min, e_max) = h.extremal_eigenvalues()?;
    let span = e_max - e_min;
    let (template, layers) = ansatz_template(&h, method, config)?;
    let obj = Objective::new(&template, &h)?.with_qubit_limit(config.max_qubits);

    let mut best: Option<OptimizationResult> = None;
    for attempt in 0..config.restarts.max(1) {
        let mut rng = seeded(derive_seed(seed, 1000 + attempt as u64));
        let theta0: Vec<f64> = (0..template.theta_len).map(|_| uniform_angle(&mut rng)).collect();
        let res = minimize_with(&obj, &theta0, &config.optimizer, &mut || false)?;
        let f = (res.e_opt - e_min) / span;
        if res.converged && f <= config.f_threshold {
            let circuit = measured(template.bind(&res.theta)?);
            return Ok(GenOutcome::Accepted(Box::new(TaskRecord {
                v: SCHEMA_VERSION,
                id: id.into(),
                kind: instance.kind,
                graph: instance.graph.clone(),
                graph2: instance.graph2.clone(),
                params: instance.params.clone(),
                qasm_gt: emit(&circuit),
                n_qubits: circuit.n_qubits,
                hamiltonian: h,
                method,
                layers,
                e_min,
                e_max,
                optimal_params: res.theta,
                final_expectation: res.e_opt,
                steps: res.steps,
                seed,
            })));
        }
        if best.as_ref().is_none_or(|b| res.e_opt < b.e_opt) {
            best = Some(res);
        }
    }
    let b = best.expect("at least one attempt");
    reject(format!(
        "no run met f <= {} (best f = {:.4}, converged = {})",
        config.f_threshold,
        (b.e_opt - e_min) / span,
        b.converged
    ))
}

/// Adds a full-register measurement into a matching bit register.
fn measured(mut c: Circuit) -> Circuit {
    c.n_clbits = c.n_qubits;
    c.measures = (0..c.n_qubits).map(|i| (i, i)).collect();
    c
}

/// Checks every record invariant and returns the reward task it defines.
pub fn validate_record(record: &TaskRecord, f_threshold: f64) -> Result<Task, DatasetError> {
    let bad = |message: String| DatasetError::Invalid {
        id: record.id.clone(),
        message,
    };
    if record.v != SCHEMA_VERSION {
        return Err(DatasetError::Version(record.v));
    }
    let circuit = parse(&record.qasm_gt).map_err(|e| bad(format!("qasm_gt does not parse: {e}")))?;
    if circuit.n_qubits != record.n_qubits || record.hamiltonian.n_qubits != record.n_qubits {
        return Err(bad(format!(
            "width mismatch: n_qubits {}, circuit {}, hamiltonian {}",
            record.n_qubits, circuit.n_qubits, record.hamiltonian.n_qubits
        )));
    }
    let rebuilt = build_problem(record.kind, &record.graph, record.graph2.as_ref(), &record.params)?;
    if !same_operator(&to_ising(&rebuilt.poly), &record.hamiltonian) {
        return Err(bad("hamiltonian does not match the encoded problem".into()));
    }
    let task = Task::with_extremes(record.hamiltonian.clone(), circuit, record.e_min, record.e_max)?;
    let limit = DEFAULT_MAX_QUBITS.max(record.n_qubits);
    let state = run_with_limit(&task.gt_circuit, limit).map_err(|e| bad(format!("{e}")))?;
    let e = record.hamiltonian.expectation(&distribution(&state))?;
    if (e - record.final_expectation).abs() > ENERGY_TOL {
        return Err(bad(format!(
            "final_expectation {} but the circuit gives {e}",
            record.final_expectation
        )));
    }
    let f = record.normalized_energy();
    if f > f_threshold {
        return Err(bad(format!("normalized energy {f} above threshold {f_threshold}")));
    }
    Ok(task)
}

fn same_operator(a: &IsingHamiltonian, b: &IsingHamiltonian) -> bool {
    if a.n_qubits != b.n_qubits || (a.constant - b.constant).abs() > ENERGY_TOL || a.num_terms() != b.num_terms() {
        return false;
    }
    a.terms()
        .zip(b.terms())
        .all(|((ka, ca), (kb, cb))| ka == kb && (ca - cb).abs() <= ENERGY_TOL)
}
