//! Reference implementations used as test oracles. Deliberately naive: dense
//! unitaries from Kronecker products, direct sums for divergences and energies.
#![allow(dead_code)]

pub mod feasibility;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_2};

use num_complex::Complex64 as C;
use qverify_core::ansatz::{extract, qaoa_template, vqe_template, ParamTemplate};
use qverify_core::hamiltonian::IsingHamiltonian;
use qverify_core::qasm::{emit, Circuit, Gate};
use qverify_core::reward::{RewardConfig, Stage, Task};
use qverify_core::rng::{seeded, uniform_angle};
use rand::Rng;

pub type M2 = [[C; 2]; 2];

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn identity2() -> M2 {
    [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]
}

fn pauli_x() -> M2 {
    [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]
}

fn pauli_y() -> M2 {
    [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]]
}

fn pauli_z() -> M2 {
    [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]]
}

fn proj(bit: usize) -> M2 {
    let mut m = [[c(0.0, 0.0); 2]; 2];
    m[bit][bit] = c(1.0, 0.0);
    m
}

fn lin2(a: C, x: &M2, b: C, y: &M2) -> M2 {
    let mut m = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a * x[i][j] + b * y[i][j];
        }
    }
    m
}

/// `exp(-i θ/2 σ) = cos(θ/2) I - i sin(θ/2) σ`.
fn rotation(sigma: &M2, theta: f64) -> M2 {
    lin2(c((theta / 2.0).cos(), 0.0), &identity2(), c(0.0, -(theta / 2.0).sin()), sigma)
}

fn phase(phi: f64) -> M2 {
    [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), C::from_polar(1.0, phi)]]
}

pub fn gate_matrix(gate: Gate, theta: f64) -> M2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match gate {
        Gate::H => lin2(c(s, 0.0), &pauli_x(), c(s, 0.0), &pauli_z()),
        Gate::X => pauli_x(),
        Gate::Y => pauli_y(),
        Gate::Z => pauli_z(),
        Gate::S => phase(FRAC_PI_2),
        Gate::Sdg => phase(-FRAC_PI_2),
        Gate::T => phase(FRAC_PI_4),
        Gate::Tdg => phase(-FRAC_PI_4),
        Gate::Rx => rotation(&pauli_x(), theta),
        Gate::Ry => rotation(&pauli_y(), theta),
        Gate::Rz => rotation(&pauli_z(), theta),
        Gate::P => phase(theta),
        g => panic!("{g} is not single-qubit"),
    }
}

/// Dense square matrix of dimension `2^n`, row-major.
#[derive(Clone, Debug)]
pub struct Dense {
    pub dim: usize,
    pub m: Vec<C>,
}

impl Dense {
    pub fn identity(dim: usize) -> Self {
        let mut m = vec![c(0.0, 0.0); dim * dim];
        for i in 0..dim {
            m[i * dim + i] = c(1.0, 0.0);
        }
        Self { dim, m }
    }

    fn kron(&self, b: &M2) -> Self {
        let dim = self.dim * 2;
        let mut m = vec![c(0.0, 0.0); dim * dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                for k in 0..2 {
                    for l in 0..2 {
                        m[(2 * i + k) * dim + 2 * j + l] = self.m[i * self.dim + j] * b[k][l];
                    }
                }
            }
        }
        Self { dim, m }
    }

    pub fn mul(&self, o: &Dense) -> Dense {
        let d = self.dim;
        let mut m = vec![c(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.m[i * d + k];
                for j in 0..d {
                    m[i * d + j] += a * o.m[k * d + j];
                }
            }
        }
        Dense { dim: d, m }
    }

    pub fn add(&self, o: &Dense, s: f64) -> Dense {
        Dense {
            dim: self.dim,
            m: self.m.iter().zip(&o.m).map(|(a, b)| a + b * s).collect(),
        }
    }

    fn scale(&self, s: f64) -> Dense {
        Dense {
            dim: self.dim,
            m: self.m.iter().map(|a| a * s).collect(),
        }
    }

    pub fn apply(&self, v: &[C]) -> Vec<C> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.m[i * self.dim + j] * v[j]).sum())
            .collect()
    }
}

/// `M_{n-1} ⊗ … ⊗ M_0`, with `factors` placed at their qubits and identity
/// elsewhere. Qubit 0 is the least significant index bit.
pub fn kron_term(n: usize, factors: &[(usize, M2)]) -> Dense {
    let mut out = Dense::identity(1);
    for q in (0..n).rev() {
        let f = factors.iter().find(|(i, _)| *i == q).map_or_else(identity2, |(_, m)| *m);
        out = out.kron(&f);
    }
    out
}

pub fn op_unitary(n: usize, gate: Gate, qubits: &[usize], theta: f64) -> Dense {
    match gate {
        Gate::Cx | Gate::Cz => {
            let t = if gate == Gate::Cx { pauli_x() } else { pauli_z() };
            kron_term(n, &[(qubits[0], proj(0))]).add(&kron_term(n, &[(qubits[0], proj(1)), (qubits[1], t)]), 1.0)
        }
        Gate::Swap => {
            let (a, b) = (qubits[0], qubits[1]);
            let mut u = Dense::identity(1 << n);
            for p in [pauli_x(), pauli_y(), pauli_z()] {
                u = u.add(&kron_term(n, &[(a, p), (b, p)]), 1.0);
            }
            // SWAP = (I + XX + YY + ZZ) / 2
            u.scale(0.5)
        }
        Gate::Ccx => {
            let both = kron_term(n, &[(qubits[0], proj(1)), (qubits[1], proj(1))]);
            let flip = kron_term(n, &[(qubits[0], proj(1)), (qubits[1], proj(1)), (qubits[2], pauli_x())]);
            Dense::identity(1 << n).add(&both, -1.0).add(&flip, 1.0)
        }
        g => kron_term(n, &[(qubits[0], gate_matrix(g, theta))]),
    }
}

/// Full circuit unitary as an ordered product of per-gate unitaries.
pub fn circuit_unitary(circuit: &Circuit) -> Dense {
    let n = circuit.n_qubits;
    let mut u = Dense::identity(1 << n);
    for op in &circuit.ops {
        let theta = op.params.first().copied().unwrap_or(0.0);
        u = op_unitary(n, op.gate, &op.qubits, theta).mul(&u);
    }
    u
}

pub fn dense_state(circuit: &Circuit) -> Vec<C> {
    let dim = 1usize << circuit.n_qubits;
    let mut e0 = vec![c(0.0, 0.0); dim];
    e0[0] = c(1.0, 0.0);
    circuit_unitary(circuit).apply(&e0)
}

pub fn probs(state: &[C]) -> Vec<f64> {
    state.iter().map(|a| a.norm_sqr()).collect()
}

/// Marginal over the low `k` bits.
pub fn marginal(p: &[f64], k: usize) -> Vec<f64> {
    let mut out = vec![0.0; 1 << k];
    for (b, v) in p.iter().enumerate() {
        out[b & ((1 << k) - 1)] += v;
    }
    out
}

/// `sqrt(JS / ln 2)` with natural-log KL terms.
pub fn js_distance(p: &[f64], q: &[f64]) -> f64 {
    let kl = |a: &[f64], m: &[f64]| -> f64 {
        a.iter()
            .zip(m)
            .filter(|(x, _)| **x > 0.0)
            .map(|(x, y)| x * (x / y).ln())
            .sum()
    };
    let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
    let js = 0.5 * kl(p, &m) + 0.5 * kl(q, &m);
    (js / LN_2).max(0.0).sqrt().min(1.0)
}

/// `Σ_b p_b · E(b)`, with `E(b)` summed term by term from the spin values.
pub fn energy(h: &IsingHamiltonian, p: &[f64]) -> f64 {
    p.iter()
        .enumerate()
        .map(|(b, pb)| {
            let e: f64 = h.constant
                + h.terms()
                    .map(|(qs, coeff)| {
                        let parity = qs.iter().filter(|&&q| b >> q & 1 == 1).count() % 2;
                        if parity == 0 {
                            coeff
                        } else {
                            -coeff
                        }
                    })
                    .sum::<f64>();
            pb * e
        })
        .sum()
}

/// Random circuit over every supported gate.
pub fn random_circuit<R: Rng>(rng: &mut R, n: usize, depth: usize) -> Circuit {
    let mut circuit = Circuit::new(n);
    let pool: Vec<Gate> = Gate::ALL.iter().copied().filter(|g| g.num_qubits() <= n).collect();
    for _ in 0..depth {
        let g = pool[rng.gen_range(0..pool.len())];
        let mut qubits: Vec<usize> = (0..n).collect();
        for i in 0..g.num_qubits() {
            let j = rng.gen_range(i..n);
            qubits.swap(i, j);
        }
        qubits.truncate(g.num_qubits());
        let params: Vec<f64> = (0..g.num_params()).map(|_| rng.gen_range(-7.0..7.0)).collect();
        circuit.push(g, &qubits, &params);
    }
    circuit
}

/// The staged-evaluation decision tree: stages that should run for a
/// candidate, given whether it parsed, its JS distance and the expectation
/// reward it would earn.
pub fn expected_stages(parsed: bool, d_js: f64, r_ev: f64, tau_js: f64, tau_ev: f64) -> Vec<Stage> {
    if !parsed {
        return vec![Stage::Syntax];
    }
    let mut s = vec![Stage::Syntax, Stage::Entropy];
    if d_js <= tau_js {
        s.push(Stage::Optimization);
    } else {
        s.push(Stage::Expectation);
        if r_ev >= tau_ev {
            s.push(Stage::Optimization);
        }
    }
    s
}

pub fn random_hamiltonian<R: Rng>(rng: &mut R, n: usize) -> IsingHamiltonian {
    let mut h = IsingHamiltonian::new(n);
    for _ in 0..rng.gen_range(1..6) {
        let q: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if !q.is_empty() {
            h.add_term(&q, rng.gen_range(-2.0..2.0)).unwrap();
        }
    }
    h
}

/// A random template of one of three shapes, its Hamiltonian and a point.
pub fn random_problem(seed: u64) -> (ParamTemplate, IsingHamiltonian, Vec<f64>) {
    let mut rng = seeded(seed);
    let n = rng.gen_range(1..=4);
    let h = random_hamiltonian(&mut rng, n);
    let template = match rng.gen_range(0..3) {
        0 => {
            let depth = rng.gen_range(1..20);
            extract(&random_circuit(&mut rng, n, depth)).0
        }
        1 => qaoa_template(&h, rng.gen_range(1..=2)).unwrap(),
        _ => vqe_template(n, rng.gen_range(1..=2)).unwrap(),
    };
    let theta = (0..template.theta_len).map(|_| uniform_angle(&mut rng)).collect();
    (template, h, theta)
}

/// A random task and candidate, with the candidate's source text.
pub struct Case {
    pub task: Task,
    pub gt: Circuit,
    pub source: String,
    pub gen: Option<Circuit>,
    pub config: RewardConfig,
}

pub fn random_case(seed: u64) -> Case {
    let mut rng = seeded(seed);
    let n_gt = rng.gen_range(1..=3);
    let mut h = IsingHamiltonian::new(n_gt);
    for _ in 0..rng.gen_range(1..4) {
        let q: Vec<usize> = (0..n_gt).filter(|_| rng.gen_bool(0.5)).collect();
        if !q.is_empty() {
            h.add_term(&q, rng.gen_range(-2.0..2.0)).unwrap();
        }
    }
    let depth = rng.gen_range(0..8);
    let gt = random_circuit(&mut rng, n_gt, depth);
    let task = Task::new(h, gt.clone()).unwrap();
    let mut config = RewardConfig {
        tau_js: rng.gen_range(0.0..1.0),
        tau_ev: rng.gen_range(0.0..1.0),
        ..RewardConfig::default()
    };
    config.optimizer.max_steps = 40;
    let (source, gen) = if rng.gen_bool(0.1) {
        ("OPENQASM 3.0;\nqubit[2] q;\nbogus q[0];\n".to_string(), None)
    } else {
        let n_gen = rng.gen_range(1..=4);
        let depth = rng.gen_range(0..10);
        let gen = random_circuit(&mut rng, n_gen, depth);
        (emit(&gen), Some(gen))
    };
    Case {
        task,
        gt,
        source,
        gen,
        config,
    }
}

/// JS distance and expectation reward computed from the dense oracle.
pub fn oracle_scores(case: &Case, gen: &Circuit) -> (f64, f64) {
    let n_gt = case.gt.n_qubits;
    let k = gen.n_qubits.min(n_gt);
    let p_gen = probs(&dense_state(gen));
    let p_gt = probs(&dense_state(&case.gt));
    let d = js_distance(&marginal(&p_gen, k), &marginal(&p_gt, k));
    let h = &case.task.hamiltonian;
    let mask = (1usize << h.n_qubits) - 1;
    let e: f64 = p_gen
        .iter()
        .enumerate()
        .map(|(b, p)| p * h.eigenvalue((b & mask) as u64))
        .sum();
    let (lo, hi) = (case.task.e_min, case.task.e_max);
    let f = if hi - lo > 1e-12 { ((e - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 };
    (d, 1.0 - f)
}
