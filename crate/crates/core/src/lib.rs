//! Weapon-target assignment as an adiabatic quantum optimization problem.
//!
//! The crate covers the whole pipeline: random instances, compilation into a
//! two-spin energy model, exact state-vector annealing on up to 16 qubits,
//! instantaneous spectra of the interpolating Hamiltonian and classical
//! baselines (exhaustive search and cross-entropy).

pub mod commands;
pub mod error;
pub mod instance;
pub mod ising;
pub mod plot;
pub mod sim;
pub mod solvers;

pub use error::{Error, Result};
