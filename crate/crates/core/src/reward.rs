//! Staged reward for a candidate circuit against a task.
//!
//! The stages run in a fixed decision tree:
//!
//! 1. **syntax**: parse the source; failure ends evaluation with total `-1`.
//! 2. **entropy**: always. Jensen-Shannon distance between the candidate and
//!    ground-truth output distributions on their common low qubits, scaled by
//!    `1 / (1 + Δn)`, plus a clipped qubit-mismatch penalty.
//! 3. **expectation**: only when `d_js > tau_js`. Rewards `1 - f` where `f` is
//!    the candidate energy min-max normalized over the spectrum.
//! 4. **optimization**: when `d_js <= tau_js` or `r_ev >= tau_ev`. Locally
//!    optimizes the candidate's rotation angles and rewards
//!    `1 / (1 + steps) + (1 - f(E_opt))`.
//!
//! The total is `r_entropy + r_qm + lambda_ev·r_ev + lambda_opt·r_opt` over the
//! stages that completed.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ansatz::extract;
use crate::divergence::js_distance;
use crate::hamiltonian::{HamiltonianError, IsingHamiltonian};
use crate::optimizer::{minimize_with, Objective, OptimizerConfig};
use crate::qasm::{count_active_extra_qubits, count_cross_register_gates, parse, Circuit};
use crate::sim::{distribution, run_with_limit, Distribution, SimError, DEFAULT_MAX_QUBITS};

/// Spectra narrower than this are treated as degenerate.
pub const DEGENERATE_SPAN: f64 = 1e-12;
/// Tolerance for matching stored extremal eigenvalues.
pub const EXTREMES_TOL: f64 = 1e-9;
pub const QM_CLIP_MIN: f64 = -0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    pub tau_js: f64,
    pub tau_ev: f64,
    pub lambda_ev: f64,
    pub lambda_opt: f64,
    pub qm_alpha: f64,
    pub qm_beta: f64,
    pub qm_gamma: f64,
    pub qm_eta: f64,
    pub max_qubits: usize,
    pub optimizer: OptimizerConfig,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            tau_js: 0.5,
            tau_ev: 0.8,
            lambda_ev: 1.0,
            lambda_opt: 1.0,
            qm_alpha: 0.0,
            qm_beta: -0.05,
            qm_gamma: -0.05,
            qm_eta: -0.10,
            max_qubits: DEFAULT_MAX_QUBITS,
            optimizer: OptimizerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TaskError {
    #[error("ground-truth circuit has {gt} qubits but the Hamiltonian needs {h}")]
    Width { h: usize, gt: usize },
    #[error("e_min {e_min} exceeds e_max {e_max}")]
    Order { e_min: f64, e_max: f64 },
    #[error("stored extremes ({e_min}, {e_max}) differ from the spectrum ({true_min}, {true_max})")]
    Extremes {
        e_min: f64,
        e_max: f64,
        true_min: f64,
        true_max: f64,
    },
    #[error("ground-truth circuit does not parse: {0}")]
    Parse(#[from] crate::qasm::ParseError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
}

/// Everything needed to score candidates for one problem instance. The
/// ground-truth output distribution is computed once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub hamiltonian: IsingHamiltonian,
    pub gt_circuit: Circuit,
    pub e_min: f64,
    pub e_max: f64,
    pub n_qubits_gt: usize,
    gt_dist: Distribution,
}

impl Task {
    /// Computes the extremal eigenvalues by enumeration.
    pub fn new(hamiltonian: IsingHamiltonian, gt_circuit: Circuit) -> Result<Self, TaskError> {
        let (e_min, e_max) = hamiltonian.extremal_eigenvalues()?;
        Self::with_extremes(hamiltonian, gt_circuit, e_min, e_max)
    }

    /// Uses stored extremes after checking them against the spectrum.
    pub fn with_extremes(
        hamiltonian: IsingHamiltonian,
        gt_circuit: Circuit,
        e_min: f64,
        e_max: f64,
    ) -> Result<Self, TaskError> {
        if hamiltonian.n_qubits > gt_circuit.n_qubits {
            return Err(TaskError::Width {
                h: hamiltonian.n_qubits,
                gt: gt_circuit.n_qubits,
            });
        }
        if matches!(e_min.partial_cmp(&e_max), None | Some(core::cmp::Ordering::Greater)) {
            return Err(TaskError::Order { e_min, e_max });
        }
        let (true_min, true_max) = hamiltonian.extremal_eigenvalues()?;
        if (true_min - e_min).abs() > EXTREMES_TOL || (true_max - e_max).abs() > EXTREMES_TOL {
            return Err(TaskError::Extremes {
                e_min,
                e_max,
                true_min,
                true_max,
            });
        }
        let gt_dist = distribution(&run_with_limit(&gt_circuit, DEFAULT_MAX_QUBITS.max(gt_circuit.n_qubits))?);
        Ok(Self {
            n_qubits_gt: gt_circuit.n_qubits,
            hamiltonian,
            gt_circuit,
            e_min,
            e_max,
            gt_dist,
        })
    }

    pub fn from_qasm(hamiltonian: IsingHamiltonian, qasm_gt: &str, e_min: f64, e_max: f64) -> Result<Self, TaskError> {
        Self::with_extremes(hamiltonian, parse(qasm_gt)?, e_min, e_max)
    }

    pub fn gt_distribution(&self) -> &Distribution {
        &self.gt_dist
    }

    /// `(E - E_min) / (E_max - E_min)` clamped to `[0, 1]`; `None` when the
    /// spectrum is degenerate.
    pub fn normalized(&self, energy: f64) -> Option<f64> {
        let span = self.e_max - self.e_min;
        if span <= DEGENERATE_SPAN {
            None
        } else {
            Some(((energy - self.e_min) / span).clamp(0.0, 1.0))
        }
    }

    /// Hamiltonian padded to `n` qubits, or at least its own width.
    pub fn hamiltonian_on(&self, n: usize) -> IsingHamiltonian {
        self.hamiltonian
            .pad_identities(n.max(self.hamiltonian.n_qubits))
            .expect("padding never shrinks")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Syntax,
    Entropy,
    Expectation,
    Optimization,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Syntax => "syntax",
            Stage::Entropy => "entropy",
            Stage::Expectation => "expectation",
            Stage::Optimization => "optimization",
        }
    }
}

/// Per-stage results. Fields of stages that did not run are `None`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub syntax_ok: bool,
    pub n_qubits_gen: Option<usize>,
    pub d_js: Option<f64>,
    pub r_entropy: Option<f64>,
    pub r_qm: Option<f64>,
    pub delta_n: Option<usize>,
    pub active_extra: Option<usize>,
    pub cross_gates: Option<usize>,
    pub e_gen: Option<f64>,
    pub f_gen: Option<f64>,
    pub r_ev: Option<f64>,
    pub e_opt: Option<f64>,
    pub n_steps: Option<usize>,
    pub r_opt: Option<f64>,
    /// Set when the task spectrum is degenerate and `f` was taken as 0.
    pub degenerate: bool,
    /// Completed stages in execution order.
    pub stages_run: Vec<Stage>,
    pub total: f64,
    pub errors: Vec<String>,
    /// Milliseconds per stage as reported by the [`Clock`].
    pub timing_ms: BTreeMap<Stage, f64>,
}

/// Time source for stage timings. The core crate has no clock of its own.
pub trait Clock {
    /// Milliseconds since an arbitrary fixed origin.
    fn now_ms(&self) -> f64;
}

/// Reports every stage as taking zero time.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now_ms(&self) -> f64 {
        0.0
    }
}

/// Output of [`entropy_stage`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyOutcome {
    pub d_js: f64,
    pub r_entropy: f64,
    pub r_qm: f64,
    pub delta_n: usize,
    pub active_extra: usize,
    pub cross_gates: usize,
}

/// Output of [`expectation_stage`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationOutcome {
    pub e_gen: f64,
    pub f_gen: f64,
    pub r_ev: f64,
    pub degenerate: bool,
}

/// Output of [`optimization_stage`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationOutcome {
    pub r_opt: f64,
    pub n_steps: usize,
    pub e_opt: f64,
    pub interrupted: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StageError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error("optimizer: {0}")]
    Optimizer(#[from] crate::optimizer::OptimizerError),
    #[error("optimization interrupted after {steps} steps")]
    Interrupted { steps: usize },
}

pub fn syntax_stage(source: &str) -> Result<Circuit, crate::qasm::ParseError> {
    parse(source)
}

fn simulate(gen: &Circuit, config: &RewardConfig) -> Result<Distribution, SimError> {
    Ok(distribution(&run_with_limit(gen, config.max_qubits)?))
}

/// Mismatch penalty `clip(α + βΔn + γ·a_extra + η·e_cross, -0.2, 0)`.
pub fn qubit_mismatch_penalty(config: &RewardConfig, delta_n: usize, active_extra: usize, cross_gates: usize) -> f64 {
    let raw = config.qm_alpha
        + config.qm_beta * delta_n as f64
        + config.qm_gamma * active_extra as f64
        + config.qm_eta * cross_gates as f64;
    raw.clamp(QM_CLIP_MIN, 0.0)
}

fn entropy_from(gen: &Circuit, gen_dist: &Distribution, task: &Task, config: &RewardConfig) -> Result<EntropyOutcome, StageError> {
    let k = gen.n_qubits.min(task.n_qubits_gt);
    let p = gen_dist.marginalize(k)?;
    let q = task.gt_dist.marginalize(k)?;
    let d_js = js_distance(&p.probs, &q.probs);
    let delta_n = gen.n_qubits.abs_diff(task.n_qubits_gt);
    let w = 1.0 / (1.0 + delta_n as f64);
    let active_extra = count_active_extra_qubits(gen, k);
    let cross_gates = count_cross_register_gates(gen, k);
    Ok(EntropyOutcome {
        d_js,
        r_entropy: w * (1.0 - d_js),
        r_qm: qubit_mismatch_penalty(config, delta_n, active_extra, cross_gates),
        delta_n,
        active_extra,
        cross_gates,
    })
}

fn expectation_from(gen: &Circuit, gen_dist: &Distribution, task: &Task) -> Result<ExpectationOutcome, StageError> {
    let width = gen.n_qubits.max(task.n_qubits_gt);
    let e_gen = task.hamiltonian_on(width).expectation(&gen_dist.padded(width))?;
    let (f_gen, degenerate) = match task.normalized(e_gen) {
        Some(f) => (f, false),
        None => (0.0, true),
    };
    Ok(ExpectationOutcome {
        e_gen,
        f_gen,
        r_ev: 1.0 - f_gen,
        degenerate,
    })
}

pub fn entropy_stage(gen: &Circuit, task: &Task, config: &RewardConfig) -> Result<EntropyOutcome, StageError> {
    entropy_from(gen, &simulate(gen, config)?, task, config)
}

pub fn expectation_stage(gen: &Circuit, task: &Task, config: &RewardConfig) -> Result<ExpectationOutcome, StageError> {
    expectation_from(gen, &simulate(gen, config)?, task)
}

pub fn optimization_stage(gen: &Circuit, task: &Task, config: &RewardConfig) -> Result<OptimizationOutcome, StageError> {
    optimization_stage_with(gen, task, config, &mut || false)
}

/// Like [`optimization_stage`], polling `stop` once per optimizer step. An
/// interrupted run is reported through `interrupted`.
pub fn optimization_stage_with(
    gen: &Circuit,
    task: &Task,
    config: &RewardConfig,
    stop: &mut dyn FnMut() -> bool,
) -> Result<OptimizationOutcome, StageError> {
    let width = gen.n_qubits.max(task.n_qubits_gt);
    let h = task.hamiltonian_on(width);
    let (template, theta0) = extract(gen);
    let obj = Objective::new(&template, &h)?.with_qubit_limit(config.max_qubits);
    let res = minimize_with(&obj, &theta0, &config.optimizer, stop)?;
    let f = task.normalized(res.e_opt).unwrap_or(0.0);
    Ok(OptimizationOutcome {
        r_opt: 1.0 / (1.0 + res.steps as f64) + (1.0 - f),
        n_steps: res.steps,
        e_opt: res.e_opt,
        interrupted: res.interrupted,
    })
}

/// Whether the expectation stage runs for a given JS distance.
pub fn runs_expectation(d_js: f64, config: &RewardConfig) -> bool {
    d_js > config.tau_js
}

/// Whether the optimization stage runs given the JS distance and, when the
/// expectation stage ran, its reward.
pub fn runs_optimization(d_js: f64, r_ev: Option<f64>, config: &RewardConfig) -> bool {
    d_js <= config.tau_js || r_ev.is_some_and(|r| r >= config.tau_ev)
}

pub fn hierarchical_reward(source: &str, task: &Task, config: &RewardConfig) -> RewardBreakdown {
    hierarchical_reward_with(source, task, config, &NoClock, &mut || false)
}

/// Full staged evaluation with a time source and an optimizer stop signal.
/// A failing stage ends evaluation; its error is recorded and the total keeps
/// the contributions of the stages that completed.
pub fn hierarchical_reward_with(
    source: &str,
    task: &Task,
    config: &RewardConfig,
    clock: &dyn Clock,
    stop: &mut dyn FnMut() -> bool,
) -> RewardBreakdown {
    let mut b = RewardBreakdown::default();
    let mut t0 = clock.now_ms();
    let mut lap = |b: &mut RewardBreakdown, stage: Stage| {
        let t = clock.now_ms();
        b.timing_ms.insert(stage, t - t0);
        t0 = t;
    };

    let gen = match syntax_stage(source) {
        Ok(c) => c,
        Err(e) => {
            b.errors.push(format!("syntax: {e}"));
            b.stages_run.push(Stage::Syntax);
            b.total = -1.0;
            lap(&mut b, Stage::Syntax);
            return b;
        }
    };
    b.syntax_ok = true;
    b.n_qubits_gen = Some(gen.n_qubits);
    b.stages_run.push(Stage::Syntax);
    lap(&mut b, Stage::Syntax);

    let outcome = simulate(&gen, config)
        .map_err(StageError::from)
        .and_then(|d| Ok((entropy_from(&gen, &d, task, config)?, d)));
    let (ent, gen_dist) = match outcome {
        Ok(v) => v,
        Err(e) => {
            b.errors.push(format!("entropy: {e}"));
            return b;
        }
    };
    b.d_js = Some(ent.d_js);
    b.r_entropy = Some(ent.r_entropy);
    b.r_qm = Some(ent.r_qm);
    b.delta_n = Some(ent.delta_n);
    b.active_extra = Some(ent.active_extra);
    b.cross_gates = Some(ent.cross_gates);
    b.total = ent.r_entropy + ent.r_qm;
    b.stages_run.push(Stage::Entropy);
    lap(&mut b, Stage::Entropy);

    if runs_expectation(ent.d_js, config) {
        match expectation_from(&gen, &gen_dist, task) {
            Ok(ev) => {
                b.e_gen = Some(ev.e_gen);
                b.f_gen = Some(ev.f_gen);
                b.r_ev = Some(ev.r_ev);
                b.degenerate |= ev.degenerate;
                b.total += config.lambda_ev * ev.r_ev;
                b.stages_run.push(Stage::Expectation);
                lap(&mut b, Stage::Expectation);
            }
            Err(e) => {
                b.errors.push(format!("expectation: {e}"));
                return b;
            }
        }
    }

    if runs_optimization(ent.d_js, b.r_ev, config) {
        let res = optimization_stage_with(&gen, task, config, stop).and_then(|o| {
            if o.interrupted {
                Err(StageError::Interrupted { steps: o.n_steps })
            } else {
                Ok(o)
            }
        });
        match res {
            Ok(o) => {
                b.e_opt = Some(o.e_opt);
                b.n_steps = Some(o.n_steps);
                b.r_opt = Some(o.r_opt);
                b.degenerate |= task.normalized(o.e_opt).is_none();
                b.total += config.lambda_opt * o.r_opt;
                b.stages_run.push(Stage::Optimization);
                lap(&mut b, Stage::Optimization);
            }
            Err(e) => b.errors.push(format!("optimization: {e}")),
        }
    }
    b
}

impl RewardBreakdown {
    /// Stage names in execution order.
    pub fn trace(&self) -> Vec<String> {
        self.stages_run.iter().map(|s| s.name().to_string()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qasm::Gate;

    const GT_X0: &str = "OPENQASM 3.0;\nqubit[1] q;\nx q[0];\n";

    fn z0_task(gt: &str) -> Task {
        let mut h = IsingHamiltonian::new(1);
        h.add_term(&[0], 1.0).unwrap();
        Task::from_qasm(h, gt, -1.0, 1.0).unwrap()
    }

    #[test]
    fn parse_failure_is_minus_one() {
        let task = z0_task(GT_X0);
        for src in ["garbage", "OPENQASM 3.0;\nqubit[1] q;\nfoo q[0];\n"] {
            let b = hierarchical_reward(src, &task, &RewardConfig::default());
            assert!(!b.syntax_ok);
            assert_eq!(b.total, -1.0);
            assert_eq!(b.stages_run, [Stage::Syntax]);
            assert!(!b.errors.is_empty());
            assert!(b.r_entropy.is_none() && b.r_opt.is_none());
        }
    }

    #[test]
    fn identical_circuit_skips_expectation() {
        let task = z0_task(GT_X0);
        let b = hierarchical_reward(GT_X0, &task, &RewardConfig::default());
        assert_eq!(b.stages_run, [Stage::Syntax, Stage::Entropy, Stage::Optimization]);
        assert_eq!(b.d_js, Some(0.0));
        assert_eq!(b.r_entropy, Some(1.0));
        assert_eq!(b.r_qm, Some(0.0));
        assert_eq!(b.n_steps, Some(0));
        assert_eq!(b.r_opt, Some(2.0));
        assert_eq!(b.total, 3.0);
    }

    #[test]
    fn energy_normalization() {
        let task = z0_task(GT_X0);
        let cfg = RewardConfig::default();
        for (g, f) in [(Some(Gate::X), 0.0), (Some(Gate::H), 0.5), (None, 1.0)] {
            let mut c = Circuit::new(1);
            if let Some(g) = g {
                c.push(g, &[0], &[]);
            }
            let ev = expectation_stage(&c, &task, &cfg).unwrap();
            assert!((ev.f_gen - f).abs() < 1e-15, "{g:?}");
            assert!((ev.r_ev - (1.0 - f)).abs() < 1e-15);
        }
    }

    #[test]
    fn mismatch_penalty_saturates() {
        let cfg = RewardConfig::default();
        assert!((qubit_mismatch_penalty(&cfg, 1, 1, 1) + 0.2).abs() < 1e-15);
        assert_eq!(qubit_mismatch_penalty(&cfg, 0, 0, 0), 0.0);
        assert_eq!(qubit_mismatch_penalty(&cfg, 5, 5, 5), -0.2);
    }

    #[test]
    fn degenerate_spectrum_flags() {
        let h = IsingHamiltonian::new(1);
        let task = Task::from_qasm(h, GT_X0, 0.0, 0.0).unwrap();
        let ev = expectation_stage(&Circuit::new(1), &task, &RewardConfig::default()).unwrap();
        assert!(ev.degenerate);
        assert_eq!(ev.f_gen, 0.0);
    }

    #[test]
    fn task_rejects_wrong_extremes() {
        let mut h = IsingHamiltonian::new(1);
        h.add_term(&[0], 1.0).unwrap();
        assert!(matches!(
            Task::from_qasm(h.clone(), GT_X0, -2.0, 1.0),
            Err(TaskError::Extremes { .. })
        ));
        assert!(matches!(Task::from_qasm(h, GT_X0, 1.0, -1.0), Err(TaskError::Order { .. })));
    }

    #[test]
    fn divergent_but_optimal_is_rescued() {
        // H = Z_0 on two qubits only cares about qubit 0, so flipping qubit 1
        // gives disjoint supports at the same optimal energy.
        let mut h = IsingHamiltonian::new(2);
        h.add_term(&[0], 1.0).unwrap();
        let task = Task::from_qasm(h, "OPENQASM 3.0;\nqubit[2] q;\nx q[0];\n", -1.0, 1.0).unwrap();
        let b = hierarchical_reward(
            "OPENQASM 3.0;\nqubit[2] q;\nx q[0];\nx q[1];\n",
            &task,
            &RewardConfig::default(),
        );
        assert_eq!(b.d_js, Some(1.0));
        assert_eq!(b.f_gen, Some(0.0));
        assert_eq!(b.r_ev, Some(1.0));
        assert_eq!(
            b.stages_run,
            [Stage::Syntax, Stage::Entropy, Stage::Expectation, Stage::Optimization]
        );
        assert_eq!(b.total, 3.0);
    }
}
