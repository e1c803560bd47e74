//! Simulated quantum-aided design of an inductively shunted Josephson junction.
//!
//! The pipeline is:
//!
//! 1. [`hamiltonian`] builds the circuit Hamiltonian in a truncated Fock basis
//!    of its harmonic part and diagonalizes it exactly.
//! 2. [`pauli`] maps the 8-level truncation onto 3 qubits with a binary-reflected
//!    Gray code and decomposes it into a weighted sum of Pauli strings.
//! 3. [`simulator`] evolves 3-qubit statevectors and density matrices, with
//!    optional gate-local depolarizing noise.
//! 4. [`ssvqe`] finds the three lowest eigenstates with a shared
//!    √iSWAP ansatz, a weighted subspace cost and SPSA.
//! 5. [`mitigation`] undoes global depolarization using the state purity.
//!
//! Energies are frequencies in GHz throughout; phases are in radians.

pub mod error;
pub mod hamiltonian;
pub mod mitigation;
pub mod pauli;
pub mod simulator;
pub mod ssvqe;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Dense complex matrix used for Hamiltonians and density matrices.
pub type CMatrix = nalgebra::DMatrix<Complex64>;

/// Largest entry modulus of a complex matrix.
pub fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
