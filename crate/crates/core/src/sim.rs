//! Exact statevector simulation.
//!
//! Amplitudes are indexed little-endian: bit `i` of a basis index is the value
//! of qubit `i`. Measurements in the circuit are ignored; the state returned by
//! [`run`] is the pre-measurement state.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::qasm::{Circuit, Gate, GateOp};

pub const DEFAULT_MAX_QUBITS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("circuit has {n_qubits} qubits, simulator limit is {limit}")]
    TooManyQubits { n_qubits: usize, limit: usize },
    #[error("marginal width {keep} must be in 1..={n_bits}")]
    BadMarginal { keep: usize, n_bits: usize },
    #[error("probability vector length {len} is not a power of two")]
    BadLength { len: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    pub n_qubits: usize,
    pub amps: Vec<Complex64>,
}

impl Statevector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply(&mut self, op: &GateOp) {
        let q = &op.qubits;
        match op.gate {
            Gate::Cx => self.apply_controlled(&q[..1], q[1], &single_qubit_matrix(Gate::X, 0.0)),
            Gate::Cz => self.apply_controlled(&q[..1], q[1], &single_qubit_matrix(Gate::Z, 0.0)),
            Gate::Ccx => self.apply_controlled(&q[..2], q[2], &single_qubit_matrix(Gate::X, 0.0)),
            Gate::Swap => self.apply_swap(q[0], q[1]),
            g => {
                let theta = op.params.first().copied().unwrap_or(0.0);
                self.apply_controlled(&[], q[0], &single_qubit_matrix(g, theta));
            }
        }
    }

    /// Applies the inverse of `op`.
    pub fn apply_inverse(&mut self, op: &GateOp) {
        let gate = match op.gate {
            Gate::S => Gate::Sdg,
            Gate::Sdg => Gate::S,
            Gate::T => Gate::Tdg,
            Gate::Tdg => Gate::T,
            g => g,
        };
        let params: Vec<f64> = op.params.iter().map(|p| -p).collect();
        self.apply(&GateOp {
            gate,
            qubits: op.qubits.clone(),
            params,
        });
    }

    /// Applies an arbitrary row-major 2x2 matrix to one qubit.
    pub fn apply_matrix(&mut self, target: usize, m: &[Complex64; 4]) {
        self.apply_controlled(&[], target, m);
    }

    fn apply_controlled(&mut self, controls: &[usize], target: usize, m: &[Complex64; 4]) {
        let tbit = 1usize << target;
        let cmask = controls.iter().fold(0usize, |acc, &c| acc | (1 << c));
        for block in (0..self.amps.len()).step_by(tbit << 1) {
            for i in block..block + tbit {
                if i & cmask != cmask {
                    continue;
                }
                let j = i | tbit;
                let (a, b) = (self.amps[i], self.amps[j]);
                self.amps[i] = m[0] * a + m[1] * b;
                self.amps[j] = m[2] * a + m[3] * b;
            }
        }
    }

    fn apply_swap(&mut self, a: usize, b: usize) {
        let (abit, bbit) = (1usize << a, 1usize << b);
        for i in 0..self.amps.len() {
            // Visit each pair once, from the side where qubit a is 1 and b is 0.
            if i & abit != 0 && i & bbit == 0 {
                self.amps.swap(i, (i ^ abit) | bbit);
            }
        }
    }
}

/// Row-major `[m00, m01, m10, m11]` for a single-qubit gate.
pub fn single_qubit_matrix(gate: Gate, theta: f64) -> [Complex64; 4] {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let phase = |phi: f64| c(libm::cos(phi), libm::sin(phi));
    let (ch, sh) = (libm::cos(theta / 2.0), libm::sin(theta / 2.0));
    let r = core::f64::consts::FRAC_1_SQRT_2;
    match gate {
        Gate::H => [c(r, 0.0), c(r, 0.0), c(r, 0.0), c(-r, 0.0)],
        Gate::X => [zero, one, one, zero],
        Gate::Y => [zero, c(0.0, -1.0), c(0.0, 1.0), zero],
        Gate::Z => [one, zero, zero, c(-1.0, 0.0)],
        Gate::S => [one, zero, zero, c(0.0, 1.0)],
        Gate::Sdg => [one, zero, zero, c(0.0, -1.0)],
        Gate::T => [one, zero, zero, phase(core::f64::consts::FRAC_PI_4)],
        Gate::Tdg => [one, zero, zero, phase(-core::f64::consts::FRAC_PI_4)],
        Gate::Rx => [c(ch, 0.0), c(0.0, -sh), c(0.0, -sh), c(ch, 0.0)],
        Gate::Ry => [c(ch, 0.0), c(-sh, 0.0), c(sh, 0.0), c(ch, 0.0)],
        Gate::Rz => [phase(-theta / 2.0), zero, zero, phase(theta / 2.0)],
        Gate::P => [one, zero, zero, phase(theta)],
        Gate::Cx | Gate::Cz | Gate::Swap | Gate::Ccx => {
            panic!("{gate} is not a single-qubit gate")
        }
    }
}

/// Simulates `circuit` from `|0…0⟩` with the default qubit limit.
pub fn run(circuit: &Circuit) -> Result<Statevector, SimError> {
    run_with_limit(circuit, DEFAULT_MAX_QUBITS)
}

pub fn run_with_limit(circuit: &Circuit, limit: usize) -> Result<Statevector, SimError> {
    if circuit.n_qubits > limit {
        return Err(SimError::TooManyQubits {
            n_qubits: circuit.n_qubits,
            limit,
        });
    }
    let mut state = Statevector::zero(circuit.n_qubits);
    for op in &circuit.ops {
        state.apply(op);
    }
    Ok(state)
}

/// Computational-basis probabilities over `n_bits` bits, little-endian.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub n_bits: usize,
    pub probs: Vec<f64>,
}

impl Distribution {
    pub fn from_probs(probs: Vec<f64>) -> Result<Self, SimError> {
        let len = probs.len();
        if !len.is_power_of_two() {
            return Err(SimError::BadLength { len });
        }
        Ok(Self {
            n_bits: len.trailing_zeros() as usize,
            probs,
        })
    }

    /// Distribution over the first `keep` bits, summing out the rest.
    pub fn marginalize(&self, keep: usize) -> Result<Distribution, SimError> {
        if keep == 0 || keep > self.n_bits {
            return Err(SimError::BadMarginal {
                keep,
                n_bits: self.n_bits,
            });
        }
        let mask = (1usize << keep) - 1;
        let mut probs = vec![0.0; 1usize << keep];
        for (i, p) in self.probs.iter().enumerate() {
            probs[i & mask] += p;
        }
        Ok(Distribution {
            n_bits: keep,
            probs,
        })
    }

    /// Extends to `n` bits with the added high bits fixed at 0.
    pub fn padded(&self, n: usize) -> Distribution {
        let mut probs = self.probs.clone();
        if n > self.n_bits {
            probs.resize(1usize << n, 0.0);
        }
        Distribution {
            n_bits: self.n_bits.max(n),
            probs,
        }
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

pub fn distribution(state: &Statevector) -> Distribution {
    Distribution {
        n_bits: state.n_qubits,
        probs: state.amps.iter().map(|a| a.norm_sqr()).collect(),
    }
}

pub fn marginalize(dist: &Distribution, keep: usize) -> Result<Distribution, SimError> {
    dist.marginalize(keep)
}
