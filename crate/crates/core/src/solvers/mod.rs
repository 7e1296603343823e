//! Exact and stochastic classical solvers used as ground truth.

mod brute;
mod cross_entropy;

pub use brute::{brute_force_ising, brute_force_wta, IsingSolution, WtaSolution, ENUMERATION_CEILING};
pub use cross_entropy::{cross_entropy_wta, CeParams, CeResult};
