//! State-vector simulation of the adiabatic evolution.

mod evolve;
mod operator;
mod spectrum;
mod state;

pub use evolve::{
    default_num_steps, evolve, local_energy_scale, uniform_times, EvolutionTrace, EvolveOptions, Integrator, Schedule,
};
pub use operator::{
    build_final_hamiltonian_exact, build_final_hamiltonian_quadratic, build_initial_hamiltonian,
    Hamiltonian, SparseMatrix, MAX_SITES,
};
pub use spectrum::{spectrum, SpectrumOptions, SpectrumTrace};
pub use state::{argmax_state, initial_state, measure_distribution, StateVector};
