//! Verification and reward engine for machine-generated quantum optimization circuits.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure computation:
//! parsing and re-emitting an OpenQASM 3 subset, exact statevector simulation,
//! Pauli-Z Hamiltonians built from pseudo-Boolean polynomials, graph problem
//! encodings, ansatz construction, parameter optimization, the staged reward and
//! the evaluation metrics. File formats, the CLI and the HTTP server live in the
//! `qverify` companion crate.
//!
//! Bit order is little-endian throughout: qubit 0 is the least significant bit of
//! a basis-state index, and a measured bit value of 1 means the corresponding
//! binary variable is 1.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod ansatz;
pub mod dataset;
pub mod divergence;
pub mod hamiltonian;
pub mod metrics;
pub mod optimizer;
pub mod problems;
pub mod qasm;
pub mod reward;
pub mod rng;
pub mod sim;

pub use hamiltonian::{IsingHamiltonian, PseudoBooleanPolynomial};
pub use qasm::{Circuit, Gate, GateOp, ParseError};
pub use reward::{RewardBreakdown, RewardConfig, Task};
pub use sim::{Distribution, Statevector};
