//! How often does the two-spin model's ground state coincide with the true
//! optimum, and how far off is it when it doesn't?

use aqc_wta::instance::{Assignment, GeneratorConfig, WtaInstance};
use aqc_wta::ising::{compile, PenaltyConfig};
use aqc_wta::solvers::{brute_force_ising, brute_force_wta};

fn main() -> aqc_wta::Result<()> {
    let count = 100;
    for (m, n) in [(4, 3), (6, 2), (2, 6)] {
        let mut hits = 0;
        let mut feasible = 0;
        let mut worst: f64 = 0.0;
        for seed in 0..count {
            let inst = WtaInstance::generate(m, n, seed, &GeneratorConfig::default())?;
            let exact = brute_force_wta(&inst)?;
            let ground = brute_force_ising(&compile(&inst, &PenaltyConfig::default_for(&inst)))?;
            let t = inst.objective_of_index(ground.index.0);
            if ground.index == exact.index {
                hits += 1;
            }
            feasible += Assignment::decode(ground.index, m, n)?.is_feasible() as usize;
            worst = worst.max(t / exact.objective - 1.0);
        }
        println!(
            "{m}x{n}: ground = optimum on {hits}/{count}, feasible {feasible}/{count}, worst excess {:.1}%",
            100.0 * worst
        );
    }
    Ok(())
}
