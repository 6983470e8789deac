//! Batch evaluation metrics over sampled candidate circuits.
//!
//! Per task, each candidate is scored for parseability (SCR), energy error
//! `|E_gen - E*|` against the ground-truth circuit's energy (SREV), relative
//! entropy `KL(P_gt ‖ P_gen)` (RE) and whether that entropy is small (HQCR).
//! Pass@1 looks at the first candidate only; Pass@k counts a task if any of
//! its first `k` candidates qualifies.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ansatz::extract;
use crate::dataset::TaskRecord;
use crate::divergence::{js_distance, kl_smoothed, KL_EPSILON};
use crate::qasm::{parse, Circuit};
use crate::reward::{Task, TaskError};
use crate::rng::{derive_seed, seeded, uniform_angle};
use crate::sim::{distribution, run_with_limit, Distribution, DEFAULT_MAX_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub k: usize,
    pub srev_tol: f64,
    pub hqcr_tol: f64,
    pub kl_epsilon: f64,
    pub max_qubits: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            k: 10,
            srev_tol: 0.2,
            hqcr_tol: 0.1,
            kl_epsilon: KL_EPSILON,
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("task {task_id} has {got} candidates, fewer than k = {k}")]
    TooFewCandidates { task_id: String, got: usize, k: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("record {id}: {source}")]
    Record { id: String, source: TaskError },
}

/// Scores of one candidate. Numeric fields are `None` when the candidate does
/// not parse or cannot be simulated.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CandidateEval {
    pub parse_ok: bool,
    pub e_gen: Option<f64>,
    pub delta_e: Option<f64>,
    pub re: Option<f64>,
    pub js: Option<f64>,
    pub f_gen: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutcome {
    pub task_id: String,
    pub candidates: Vec<CandidateEval>,
}

/// Energy of a distribution under the task Hamiltonian, padding the narrower
/// side with idle qubits.
fn energy(task: &Task, dist: &Distribution) -> f64 {
    let width = dist.n_bits.max(task.n_qubits_gt);
    task.hamiltonian_on(width)
        .expectation(&dist.padded(width))
        .expect("widths agree after padding")
}

/// Ground-truth energy `E*`.
pub fn reference_energy(task: &Task) -> f64 {
    energy(task, task.gt_distribution())
}

pub fn evaluate_circuit(task: &Task, circuit: &Circuit, config: &MetricsConfig) -> CandidateEval {
    let Ok(state) = run_with_limit(circuit, config.max_qubits) else {
        return CandidateEval {
            parse_ok: true,
            ..CandidateEval::default()
        };
    };
    let gen = distribution(&state);
    let k = gen.n_bits.min(task.n_qubits_gt);
    let p_gen = gen.marginalize(k).expect("1 <= k <= width");
    let p_gt = task.gt_distribution().marginalize(k).expect("1 <= k <= width");
    let e_gen = energy(task, &gen);
    CandidateEval {
        parse_ok: true,
        e_gen: Some(e_gen),
        delta_e: Some((e_gen - reference_energy(task)).abs()),
        re: Some(kl_smoothed(&p_gt.probs, &p_gen.probs, config.kl_epsilon)),
        js: Some(js_distance(&p_gen.probs, &p_gt.probs)),
        f_gen: Some(task.normalized(e_gen).unwrap_or(0.0)),
    }
}

pub fn evaluate_source(task: &Task, source: &str, config: &MetricsConfig) -> CandidateEval {
    match parse(source) {
        Ok(c) => evaluate_circuit(task, &c, config),
        Err(_) => CandidateEval::default(),
    }
}

pub fn evaluate_candidates<S: AsRef<str>>(
    task_id: &str,
    task: &Task,
    sources: &[S],
    config: &MetricsConfig,
) -> EvalOutcome {
    EvalOutcome {
        task_id: task_id.into(),
        candidates: sources.iter().map(|s| evaluate_source(task, s.as_ref(), config)).collect(),
    }
}

/// Percentages in `[0, 100]`; `re` is absent when no candidate parsed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub scr: f64,
    pub srev: f64,
    pub re: Option<f64>,
    pub hqcr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaStats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n_tasks: usize,
    pub k: usize,
    pub srev_tol: f64,
    pub hqcr_tol: f64,
    pub pass_1: MetricRow,
    pub pass_k: MetricRow,
    /// `|E_gen - E*|` over every simulated candidate among the first `k`.
    pub delta_e: Option<DeltaStats>,
}

fn percent(hits: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        100.0 * hits as f64 / n as f64
    }
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn row(outcomes: &[EvalOutcome], k: usize, srev_tol: f64, hqcr_tol: f64) -> MetricRow {
    let (mut scr, mut srev, mut hqcr) = (0, 0, 0);
    let mut res = Vec::new();
    for o in outcomes {
        let c = &o.candidates[..k];
        scr += usize::from(c.iter().any(|e| e.parse_ok));
        srev += usize::from(c.iter().any(|e| e.delta_e.is_some_and(|d| d <= srev_tol)));
        hqcr += usize::from(c.iter().any(|e| e.re.is_some_and(|r| r <= hqcr_tol)));
        if let Some(best) = c.iter().filter_map(|e| e.re).reduce(f64::min) {
            res.push(best);
        }
    }
    let n = outcomes.len();
    MetricRow {
        scr: percent(scr, n),
        srev: percent(srev, n),
        re: mean(&res),
        hqcr: percent(hqcr, n),
    }
}

/// Aggregates Pass@1 and Pass@k rows. For RE, each task contributes its
/// smallest entropy among parseable candidates.
pub fn compute_metrics(outcomes: &[EvalOutcome], srev_tol: f64, hqcr_tol: f64, k: usize) -> Result<MetricsReport, MetricsError> {
    if k == 0 {
        return Err(MetricsError::ZeroK);
    }
    if let Some(o) = outcomes.iter().find(|o| o.candidates.len() < k) {
        return Err(MetricsError::TooFewCandidates {
            task_id: o.task_id.clone(),
            got: o.candidates.len(),
            k,
        });
    }
    let mut deltas: Vec<f64> = outcomes
        .iter()
        .flat_map(|o| o.candidates[..k].iter().filter_map(|c| c.delta_e))
        .collect();
    deltas.sort_by(f64::total_cmp);
    let delta_e = mean(&deltas).map(|m| {
        let n = deltas.len();
        DeltaStats {
            count: n,
            mean: m,
            median: if n % 2 == 1 {
                deltas[n / 2]
            } else {
                0.5 * (deltas[n / 2 - 1] + deltas[n / 2])
            },
            min: deltas[0],
            max: deltas[n - 1],
        }
    });
    Ok(MetricsReport {
        n_tasks: outcomes.len(),
        k,
        srev_tol,
        hqcr_tol,
        pass_1: row(outcomes, 1, srev_tol, hqcr_tol),
        pass_k: row(outcomes, k, srev_tol, hqcr_tol),
        delta_e,
    })
}

/// Ground-truth versus randomly re-parameterized scores for one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub id: String,
    pub js_gt: f64,
    pub f_gt: f64,
    pub js_rand: Option<f64>,
    pub f_rand: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub samples: usize,
    pub rows: Vec<BaselineRow>,
    pub mean_js_gt: Option<f64>,
    pub mean_js_rand: Option<f64>,
    pub mean_f_gt: Option<f64>,
    pub mean_f_rand: Option<f64>,
}

impl BaselineReport {
    /// Fraction of records where the ground truth scores strictly lower than
    /// the random mean on both JS distance and normalized energy.
    pub fn win_rate(&self) -> Option<f64> {
        let scored: Vec<&BaselineRow> = self.rows.iter().filter(|r| r.f_rand.is_some()).collect();
        let wins = scored
            .iter()
            .filter(|r| r.f_gt < r.f_rand.unwrap() && r.js_gt < r.js_rand.unwrap())
            .count();
        (!scored.is_empty()).then(|| wins as f64 / scored.len() as f64)
    }
}

/// Scores `circuit` and `samples` copies of it whose rotation angles are drawn
/// uniformly from `(-π, π]`.
pub fn baseline_row(
    id: &str,
    task: &Task,
    circuit: &Circuit,
    samples: usize,
    seed: u64,
    config: &MetricsConfig,
) -> BaselineRow {
    let score = |c: &Circuit| {
        let e = evaluate_circuit(task, c, config);
        (e.js.unwrap_or(1.0), e.f_gen.unwrap_or(1.0))
    };
    let (js_gt, f_gt) = score(circuit);
    let (template, _) = extract(circuit);
    let mut rng = seeded(seed);
    let (mut js_sum, mut f_sum) = (0.0, 0.0);
    for _ in 0..samples {
        let theta: Vec<f64> = (0..template.theta_len).map(|_| uniform_angle(&mut rng)).collect();
        let (js, f) = score(&template.bind(&theta).expect("length matches"));
        js_sum += js;
        f_sum += f;
    }
    let m = samples as f64;
    BaselineRow {
        id: id.into(),
        js_gt,
        f_gt,
        js_rand: (samples > 0).then(|| js_sum / m),
        f_rand: (samples > 0).then(|| f_sum / m),
    }
}

pub fn random_baseline(records: &[TaskRecord], samples: usize, seed: u64, config: &MetricsConfig) -> Result<BaselineReport, MetricsError> {
    let mut rows = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        let task = r.to_task().map_err(|source| MetricsError::Record {
            id: r.id.clone(),
            source,
        })?;
        rows.push(baseline_row(&r.id, &task, &task.gt_circuit, samples, derive_seed(seed, i as u64), config));
    }
    let col = |f: fn(&BaselineRow) -> Option<f64>| mean(&rows.iter().filter_map(f).collect::<Vec<_>>());
    Ok(BaselineReport {
        samples,
        mean_js_gt: col(|r| Some(r.js_gt)),
        mean_f_gt: col(|r| Some(r.f_gt)),
        mean_js_rand: col(|r| r.js_rand),
        mean_f_rand: col(|r| r.f_rand),
        rows,
    })
}
