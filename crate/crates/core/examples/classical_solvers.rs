//! Exhaustive search, the compiled model's ground state and cross-entropy
//! on one instance of each 12-qubit shape.

use aqc_wta::instance::{GeneratorConfig, WtaInstance};
use aqc_wta::ising::{compile, PenaltyConfig};
use aqc_wta::solvers::{brute_force_ising, brute_force_wta, cross_entropy_wta, CeParams};

fn main() -> aqc_wta::Result<()> {
    for (m, n) in [(4, 3), (6, 2), (2, 6)] {
        let inst = WtaInstance::generate(m, n, 1, &GeneratorConfig::default())?;
        let exact = brute_force_wta(&inst)?;
        let ground = brute_force_ising(&compile(&inst, &PenaltyConfig::default_for(&inst)))?;
        let ce = cross_entropy_wta(&inst, &CeParams::with_seed(7))?;

        println!("{m}x{n}");
        println!("  exhaustive     k = {:<5} T = {:.6}", exact.index.0, exact.objective);
        println!(
            "  ising ground   k = {:<5} T = {:.6}",
            ground.index.0,
            inst.objective_of_index(ground.index.0)
        );
        println!(
            "  cross-entropy  k = {:<5} T = {:.6} after {} iterations",
            ce.index.0, ce.objective, ce.iterations
        );
    }
    Ok(())
}
