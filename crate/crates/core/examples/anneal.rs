//! Anneal the 4x3 instance for a few annealing times and watch the ground
//! state population grow.
//!
//!     cargo run --release --example anneal

use aqc_wta::instance::{GeneratorConfig, WtaInstance};
use aqc_wta::ising::{compile, PenaltyConfig};
use aqc_wta::sim::{
    build_final_hamiltonian_quadratic, build_initial_hamiltonian, evolve, EvolveOptions, Schedule,
};

fn main() -> aqc_wta::Result<()> {
    let inst = WtaInstance::generate(4, 3, 1, &GeneratorConfig::default())?;
    let model = compile(&inst, &PenaltyConfig::default_for(&inst));
    let hb = build_initial_hamiltonian(inst.num_sites())?;
    let hf = build_final_hamiltonian_quadratic(&model)?;

    for t_a in [10.0, 20.0, 40.0, 80.0] {
        let schedule = Schedule::with_default_steps(t_a, &hf, 9)?;
        let (state, trace) = evolve(&hb, &hf, &schedule, &EvolveOptions::default())?;
        let ground = trace.ground_state;
        let p = state.probabilities();
        let path: Vec<String> = trace
            .column(ground)
            .unwrap_or_default()
            .iter()
            .map(|x| format!("{x:.3}"))
            .collect();
        println!(
            "T_a = {t_a:>5}: {:>6} steps, P(ground) = {:.4}, argmax is ground: {}, drift {:.1e}",
            schedule.num_steps(),
            p[ground.0 as usize],
            state.argmax() == ground,
            trace.max_norm_drift
        );
        println!("            along the way: {}", path.join(" "));
    }
    Ok(())
}
