//! Draw a random instance, print it and check the JSON round trip.
//!
//!     cargo run --example generate_instance -- 4 3 1

use aqc_wta::instance::{GeneratorConfig, WtaInstance};

fn main() -> aqc_wta::Result<()> {
    let args: Vec<u64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("arguments are integers: m n seed"))
        .collect();
    let (m, n, seed) = match args[..] {
        [m, n, s] => (m as usize, n as usize, s),
        [] => (4, 3, 1),
        _ => panic!("usage: generate_instance [m n seed]"),
    };

    let cfg = GeneratorConfig::default();
    let inst = WtaInstance::generate(m, n, seed, &cfg)?;
    println!("{m} weapons, {n} targets, N = {} qubits, K = {}", inst.num_sites(), inst.dimension());
    println!("values: {:.3?}", inst.values());
    for (i, row) in inst.probs().iter().enumerate() {
        println!("  weapon {i}: {row:.3?}");
    }
    println!(
        "every weapon has a kill probability >= {}: {}",
        cfg.large_threshold,
        inst.every_row_has_large_prob(cfg.large_threshold)
    );

    let json = inst.to_json();
    assert_eq!(WtaInstance::from_json(&json)?, inst);
    println!("\n{json}");
    Ok(())
}
