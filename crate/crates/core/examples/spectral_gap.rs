//! Lowest levels of H(t) for the 6x2 instance, written to an SVG plot.

use aqc_wta::instance::{GeneratorConfig, WtaInstance};
use aqc_wta::ising::{compile, PenaltyConfig};
use aqc_wta::plot::{line_plot, Series};
use aqc_wta::sim::{
    build_final_hamiltonian_quadratic, build_initial_hamiltonian, spectrum, uniform_times,
    SpectrumOptions,
};

fn main() -> aqc_wta::Result<()> {
    let inst = WtaInstance::generate(6, 2, 1, &GeneratorConfig::default())?;
    let model = compile(&inst, &PenaltyConfig::default_for(&inst));
    let hb = build_initial_hamiltonian(inst.num_sites())?;
    let hf = build_final_hamiltonian_quadratic(&model)?;

    let total = 1.0;
    let tr = spectrum(&hb, &hf, &uniform_times(total, 25), total, &SpectrumOptions::with_k(4))?;
    for (t, ev) in tr.times.iter().zip(&tr.eigenvalues) {
        println!("s = {t:.3}  {:>9.4?}", ev);
    }
    let (t, gap) = tr.min_gap().expect("at least one sample");
    println!("minimum gap {gap:.5} at s = {t:.3}");

    let series: Vec<Series> = (0..4)
        .map(|i| Series {
            label: format!("lambda_{i}"),
            points: tr.times.iter().zip(&tr.eigenvalues).map(|(&t, e)| (t, e[i])).collect(),
        })
        .collect();
    let path = std::env::temp_dir().join("spectral_gap_6x2.svg");
    std::fs::write(&path, line_plot("6x2 spectrum", "t / T_a", "energy", &series))?;
    println!("plot written to {}", path.display());
    Ok(())
}
