//! Compile a small instance into QUBO form, change basis to spins and
//! compare energies of a few assignments.

use aqc_wta::instance::{Assignment, WtaInstance};
use aqc_wta::ising::{compile, structural_pair_bound, PenaltyConfig};

fn main() -> aqc_wta::Result<()> {
    // two weapons, two targets
    let inst = WtaInstance::new(vec![1.0, 2.0], vec![vec![0.9, 0.5], vec![0.3, 0.8]])?;
    let penalty = PenaltyConfig::default_for(&inst);
    let qubo = compile(&inst, &penalty);
    let ising = qubo.to_ising()?;

    println!("C = {}", penalty.c);
    println!(
        "{} linear and {} quadratic terms (bound {})",
        qubo.num_linear_terms(),
        qubo.num_quadratic_terms(),
        structural_pair_bound(2, 2)
    );
    for (&(a, b), &v) in qubo.quadratic() {
        println!("  s{a} s{b}: {v:+.4}");
    }

    let (couplings, fields) = ising.hardware_couplings()?;
    println!("hardware J: {couplings:.4?}");
    println!("hardware h: {fields:.4?}");

    println!("\n{:<18} {:>10} {:>10} {:>10}", "assignment", "objective", "qubo", "ising");
    for rows in [
        vec![vec![0, 0], vec![0, 0]],
        vec![vec![1, 0], vec![0, 1]],
        vec![vec![0, 1], vec![0, 1]],
        vec![vec![1, 1], vec![0, 1]],
    ] {
        let a = Assignment::from_rows(&rows)?;
        let bits = a.to_bitstring();
        println!(
            "{:<18} {:>10.4} {:>10.4} {:>10.4}",
            format!("{rows:?}"),
            inst.objective(&a)?,
            qubo.energy(&bits)?,
            ising.energy(&bits)?
        );
    }
    Ok(())
}
