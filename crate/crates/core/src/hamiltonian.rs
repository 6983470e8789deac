//! Pseudo-Boolean polynomials and diagonal Pauli-Z Hamiltonians.
//!
//! A binary variable `x_i` is identified with qubit `i` through
//! `x_i = (1 - z_i) / 2`, where `z_i = (-1)^{b_i}` is the Z eigenvalue of the
//! measured bit `b_i`. A measured 1 therefore means `x_i = 1`, and a sampled
//! bitstring reads directly as a variable assignment. [`decode_assignment`] is
//! the single place that encodes this convention.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::sim::Distribution;

/// Coefficients smaller than this are removed after merging like terms.
pub const COEFF_EPS: f64 = 1e-12;

pub const DEFAULT_ENUMERATION_LIMIT: usize = 24;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HamiltonianError {
    #[error("Hamiltonian acts on {hamiltonian} qubits but the state has {state}")]
    WidthMismatch { hamiltonian: usize, state: usize },
    #[error("{n_qubits} qubits exceeds the enumeration limit {limit}")]
    TooLarge { n_qubits: usize, limit: usize },
    #[error("cannot pad a {from}-qubit Hamiltonian down to {to} qubits")]
    PadShrink { from: usize, to: usize },
    #[error("term index {index} out of range for {n} variables")]
    IndexOutOfRange { index: usize, n: usize },
}

/// Variable assignment encoded by basis index `b`: `x_i = 1` iff bit `i` of `b` is 1.
pub fn decode_assignment(b: usize, n_vars: usize) -> Vec<bool> {
    (0..n_vars).map(|i| (b >> i) & 1 == 1).collect()
}

fn insert_term(terms: &mut BTreeMap<Vec<usize>, f64>, key: Vec<usize>, coeff: f64) {
    let e = terms.entry(key).or_insert(0.0);
    *e += coeff;
}

fn prune(terms: &mut BTreeMap<Vec<usize>, f64>) {
    terms.retain(|_, c| c.abs() >= COEFF_EPS);
}

fn mask_of(indices: &[usize]) -> u64 {
    indices.iter().fold(0u64, |m, &i| m | (1u64 << i))
}

/// `Σ_S α_S Π_{i∈S} x_i` over binary variables. The empty set holds the constant.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PseudoBooleanPolynomial {
    pub n_vars: usize,
    terms: BTreeMap<Vec<usize>, f64>,
}

impl PseudoBooleanPolynomial {
    pub fn new(n_vars: usize) -> Self {
        Self {
            n_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_vars: usize, c: f64) -> Self {
        let mut p = Self::new(n_vars);
        p.add_term(&[], c);
        p
    }

    /// `Σ_i coeffs[i].1 · x_{coeffs[i].0} + offset`.
    pub fn linear(n_vars: usize, offset: f64, coeffs: &[(usize, f64)]) -> Self {
        let mut p = Self::constant(n_vars, offset);
        for &(i, c) in coeffs {
            p.add_term(&[i], c);
        }
        p
    }

    /// Adds `coeff · Π x_i`; repeated indices collapse since `x² = x`.
    pub fn add_term(&mut self, vars: &[usize], coeff: f64) {
        let mut key = vars.to_vec();
        key.sort_unstable();
        key.dedup();
        if let Some(&max) = key.last() {
            assert!(max < self.n_vars, "variable {max} out of range for {} vars", self.n_vars);
        }
        insert_term(&mut self.terms, key, coeff);
        prune(&mut self.terms);
    }

    pub fn add_scaled(&mut self, other: &PseudoBooleanPolynomial, scale: f64) {
        self.n_vars = self.n_vars.max(other.n_vars);
        for (k, c) in &other.terms {
            insert_term(&mut self.terms, k.clone(), c * scale);
        }
        prune(&mut self.terms);
    }

    pub fn product(&self, other: &PseudoBooleanPolynomial) -> PseudoBooleanPolynomial {
        let mut out = Self::new(self.n_vars.max(other.n_vars));
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let mut key: Vec<usize> = ka.iter().chain(kb).copied().collect();
                key.sort_unstable();
                key.dedup();
                insert_term(&mut out.terms, key, ca * cb);
            }
        }
        prune(&mut out.terms);
        out
    }

    pub fn square(&self) -> PseudoBooleanPolynomial {
        self.product(self)
    }

    pub fn scaled(&self, s: f64) -> PseudoBooleanPolynomial {
        let mut out = Self::new(self.n_vars);
        out.add_scaled(self, s);
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.terms.iter().map(|(k, c)| (k.as_slice(), *c))
    }

    pub fn constant_term(&self) -> f64 {
        self.terms.get(&Vec::new()).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn evaluate(&self, x: &[bool]) -> f64 {
        self.terms
            .iter()
            .filter(|(k, _)| k.iter().all(|&i| x[i]))
            .map(|(_, c)| c)
            .sum()
    }

    /// Value at the assignment encoded by basis index `b`.
    pub fn evaluate_index(&self, b: u64) -> f64 {
        self.terms
            .iter()
            .filter(|(k, _)| {
                let m = mask_of(k);
                b & m == m
            })
            .map(|(_, c)| c)
            .sum()
    }
}

/// Wire form of one Hamiltonian term; `z = []` carries the constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZTerm {
    pub z: Vec<usize>,
    pub coeff: f64,
}

/// Serialized layout of an [`IsingHamiltonian`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianWire {
    pub n_qubits: usize,
    pub terms: Vec<ZTerm>,
}

/// `constant + Σ_S c_S Π_{i∈S} Z_i`, diagonal in the computational basis.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(into = "HamiltonianWire", try_from = "HamiltonianWire")]
pub struct IsingHamiltonian {
    pub n_qubits: usize,
    pub constant: f64,
    terms: BTreeMap<Vec<usize>, f64>,
}

impl IsingHamiltonian {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            constant: 0.0,
            terms: BTreeMap::new(),
        }
    }

    /// Adds `coeff · Π Z_i`. `Z² = I`, so indices appearing twice cancel.
    pub fn add_term(&mut self, qubits: &[usize], coeff: f64) -> Result<(), HamiltonianError> {
        let mut key: Vec<usize> = Vec::new();
        let mut sorted = qubits.to_vec();
        sorted.sort_unstable();
        for q in sorted {
            if q >= self.n_qubits {
                return Err(HamiltonianError::IndexOutOfRange {
                    index: q,
                    n: self.n_qubits,
                });
            }
            if key.last() == Some(&q) {
                key.pop();
            } else {
                key.push(q);
            }
        }
        if key.is_empty() {
            self.constant += coeff;
        } else {
            insert_term(&mut self.terms, key, coeff);
            prune(&mut self.terms);
        }
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.terms.iter().map(|(k, c)| (k.as_slice(), *c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    fn masks(&self) -> Vec<(u64, f64)> {
        assert!(self.n_qubits <= 64, "basis enumeration needs at most 64 qubits");
        self.terms.iter().map(|(k, c)| (mask_of(k), *c)).collect()
    }

    fn eigen_with(constant: f64, masks: &[(u64, f64)], b: u64) -> f64 {
        masks.iter().fold(constant, |acc, &(m, c)| {
            if (b & m).count_ones().is_multiple_of(2) {
                acc + c
            } else {
                acc - c
            }
        })
    }

    /// Eigenvalue of basis state `b`.
    pub fn eigenvalue(&self, b: u64) -> f64 {
        Self::eigen_with(self.constant, &self.masks(), b)
    }

    /// `⟨ψ|H|ψ⟩ = Σ_b p_b · eig(b)` for a distribution of matching width.
    pub fn expectation(&self, dist: &Distribution) -> Result<f64, HamiltonianError> {
        if dist.n_bits != self.n_qubits {
            return Err(HamiltonianError::WidthMismatch {
                hamiltonian: self.n_qubits,
                state: dist.n_bits,
            });
        }
        let masks = self.masks();
        Ok(dist
            .probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != 0.0)
            .map(|(b, p)| p * Self::eigen_with(self.constant, &masks, b as u64))
            .sum())
    }

    /// Exact `(E_min, E_max)` by enumerating all basis states.
    pub fn extremal_eigenvalues(&self) -> Result<(f64, f64), HamiltonianError> {
        self.extremal_eigenvalues_with_limit(DEFAULT_ENUMERATION_LIMIT)
    }

    pub fn extremal_eigenvalues_with_limit(
        &self,
        limit: usize,
    ) -> Result<(f64, f64), HamiltonianError> {
        if self.n_qubits > limit {
            return Err(HamiltonianError::TooLarge {
                n_qubits: self.n_qubits,
                limit,
            });
        }
        let masks = self.masks();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for b in 0..(1u64 << self.n_qubits) {
            let e = Self::eigen_with(self.constant, &masks, b);
            lo = lo.min(e);
            hi = hi.max(e);
        }
        Ok((lo, hi))
    }

    /// Same operator on `n_target ≥ n_qubits` qubits, identity on the new ones.
    pub fn pad_identities(&self, n_target: usize) -> Result<IsingHamiltonian, HamiltonianError> {
        if n_target < self.n_qubits {
            return Err(HamiltonianError::PadShrink {
                from: self.n_qubits,
                to: n_target,
            });
        }
        let mut h = self.clone();
        h.n_qubits = n_target;
        Ok(h)
    }

    /// Term-wise sum; the result acts on the wider of the two.
    pub fn sum(&self, other: &IsingHamiltonian) -> IsingHamiltonian {
        let mut h = self.clone();
        h.n_qubits = h.n_qubits.max(other.n_qubits);
        h.constant += other.constant;
        for (k, c) in &other.terms {
            insert_term(&mut h.terms, k.clone(), *c);
        }
        prune(&mut h.terms);
        h
    }

    /// Constant first, then terms in sorted index order.
    pub fn to_records(&self) -> Vec<ZTerm> {
        let mut out = Vec::with_capacity(self.terms.len() + 1);
        out.push(ZTerm {
            z: Vec::new(),
            coeff: self.constant,
        });
        out.extend(self.terms.iter().map(|(k, c)| ZTerm {
            z: k.clone(),
            coeff: *c,
        }));
        out
    }

    pub fn from_records(n_qubits: usize, records: &[ZTerm]) -> Result<Self, HamiltonianError> {
        let mut h = Self::new(n_qubits);
        for r in records {
            h.add_term(&r.z, r.coeff)?;
        }
        Ok(h)
    }
}

impl From<IsingHamiltonian> for HamiltonianWire {
    fn from(h: IsingHamiltonian) -> Self {
        Self {
            n_qubits: h.n_qubits,
            terms: h.to_records(),
        }
    }
}

impl TryFrom<HamiltonianWire> for IsingHamiltonian {
    type Error = HamiltonianError;

    fn try_from(w: HamiltonianWire) -> Result<Self, Self::Error> {
        IsingHamiltonian::from_records(w.n_qubits, &w.terms)
    }
}

/// Rewrites a binary polynomial over spins via `x_i = (1 - Z_i) / 2`.
///
/// Each monomial `α Π_{i∈S} x_i` expands to `α / 2^|S| Σ_{T⊆S} (-1)^|T| Z_T`.
pub fn to_ising(poly: &PseudoBooleanPolynomial) -> IsingHamiltonian {
    let mut h = IsingHamiltonian::new(poly.n_vars);
    let mut terms: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for (s, alpha) in poly.terms() {
        let scale = alpha / libm::ldexp(1.0, s.len() as i32);
        for subset in 0u64..(1u64 << s.len()) {
            let key: Vec<usize> = s
                .iter()
                .enumerate()
                .filter(|(j, _)| subset >> j & 1 == 1)
                .map(|(_, &i)| i)
                .collect();
            let sign = if key.len().is_multiple_of(2) { 1.0 } else { -1.0 };
            insert_term(&mut terms, key, sign * scale);
        }
    }
    h.constant = terms.remove(&Vec::new()).unwrap_or(0.0);
    prune(&mut terms);
    h.terms = terms;
    h
}
