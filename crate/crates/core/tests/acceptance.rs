//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Runs the three 12-qubit shapes (4x3, 6x2, 2x6) through every stage. Takes a
//! couple of minutes on one core with optimizations on.

use std::process::ExitCode;
use std::time::Instant;

use aqc_wta::commands::non_decreasing_within;
use aqc_wta::instance::{Assignment, BasisIndex, GeneratorConfig, WtaInstance};
use aqc_wta::ising::{compile, PenaltyConfig};
use aqc_wta::sim::{
    build_final_hamiltonian_exact, build_final_hamiltonian_quadratic, build_initial_hamiltonian,
    evolve, spectrum, uniform_times, EvolveOptions, Schedule, SpectrumOptions,
};
use aqc_wta::solvers::{brute_force_ising, brute_force_wta, cross_entropy_wta, CeParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SHAPES: [(usize, usize); 3] = [(4, 3), (6, 2), (2, 6)];
const SWEEP: [f64; 5] = [10.0, 20.0, 40.0, 80.0, 160.0];
const FIXED_SEED: u64 = 1;
const POPULATION: u64 = 100;

const BASIS_TOL: f64 = 1e-12;
const ORACLE_TOL: f64 = 1e-12;
const DRIFT_TOL: f64 = 1e-6;
const HALVING_TOL: f64 = 1e-6;
const CONVERGED_POPULATION: f64 = 0.5;
const CE_REQUIRED: usize = 95;
const TREND_TOL: f64 = 0.02;

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: u32, name: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!("{} [{id:>2}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }

    fn info(&mut self, id: u32, name: &str, detail: String) {
        println!("INFO [{id:>2}] {name}: {detail}");
    }
}

fn generate(m: usize, n: usize, seed: u64) -> WtaInstance {
    WtaInstance::generate(m, n, seed, &GeneratorConfig::default()).expect("valid generator")
}

fn objective_oracle(inst: &WtaInstance, x: &Assignment) -> f64 {
    let mut total = 0.0;
    for j in 0..inst.targets() {
        let mut survive = 1.0;
        for i in 0..inst.weapons() {
            if x.get(i, j) {
                survive *= 1.0 - inst.prob(i, j);
            }
        }
        total += inst.value(j) * survive;
    }
    total
}

/// Compiled energy from the pair blocks, evaluated directly.
fn model_oracle(inst: &WtaInstance, c: f64, x: &Assignment) -> f64 {
    let (m, n) = (inst.weapons(), inst.targets());
    let s = |i, j| if x.get(i, j) { 1.0 } else { 0.0 };
    let mut e = 0.0;
    for i in 0..m {
        for j in 0..n {
            for jp in j + 1..n {
                e += inst.value(j) * (1.0 - inst.prob(i, j) * s(i, j))
                    + inst.value(jp) * (1.0 - inst.prob(i, jp) * s(i, jp))
                    + c * s(i, j) * s(i, jp);
            }
        }
    }
    for j in 0..n {
        for i in 0..m {
            for ip in i + 1..m {
                e += inst.value(j)
                    * (1.0 - inst.prob(i, j) * s(i, j))
                    * (1.0 - inst.prob(ip, j) * s(ip, j));
            }
        }
    }
    e
}

fn encoding(r: &mut Report) {
    let mut failures = 0;
    for (m, n) in SHAPES {
        for k in 0..1u64 << (m * n) {
            let a = Assignment::decode(BasisIndex(k), m, n).unwrap();
            failures += (a.encode() != BasisIndex(k)) as usize;
        }
    }
    r.line(1, "encoding bijection", failures == 0, format!("{failures} failures over 3 x 4096 indices"));
}

fn basis_change(r: &mut Report) {
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (m, n) in SHAPES {
        for seed in 0..20 {
            let inst = generate(m, n, 1000 + seed);
            let qubo = compile(&inst, &PenaltyConfig::default_for(&inst));
            let ising = qubo.to_ising().unwrap();
            let ks: Vec<u64> = if m * n <= 10 {
                (0..inst.dimension()).collect()
            } else {
                (0..10_000).map(|_| rng.gen_range(0..inst.dimension())).collect()
            };
            for k in ks {
                worst = worst.max((qubo.energy_of_index(k) - ising.energy_of_index(k)).abs());
                checked += 1;
            }
        }
    }
    r.line(
        2,
        "basis change",
        worst <= BASIS_TOL,
        format!("max |E_s - E_z| = {worst:.2e} over {checked} bitstrings (tol {BASIS_TOL:e})"),
    );
}

fn diagonal_oracle(r: &mut Report) {
    let mut worst: f64 = 0.0;
    for (m, n) in SHAPES {
        let inst = generate(m, n, FIXED_SEED);
        let pen = PenaltyConfig::default_for(&inst);
        let hq = build_final_hamiltonian_quadratic(&compile(&inst, &pen)).unwrap();
        let he = build_final_hamiltonian_exact(&inst, &pen).unwrap();
        let (dq, de) = (hq.diagonal_entries().unwrap(), he.diagonal_entries().unwrap());
        for k in 0..inst.dimension() {
            let a = Assignment::decode(BasisIndex(k), m, n).unwrap();
            let exact = objective_oracle(&inst, &a) + pen.c * a.double_assignment_pairs() as f64;
            worst = worst
                .max((dq[k as usize] - model_oracle(&inst, pen.c, &a)).abs())
                .max((de[k as usize] - exact).abs());
        }
    }
    r.line(
        3,
        "diagonal oracle",
        worst <= ORACLE_TOL,
        format!("max deviation {worst:.2e} over both Hamiltonians, 3 x 4096 entries (tol {ORACLE_TOL:e})"),
    );
}

struct Sweep {
    shape: (usize, usize),
    ground_populations: Vec<f64>,
    argmax_matches: Vec<bool>,
    max_drift: f64,
}

fn anneal(r: &mut Report) -> Vec<Sweep> {
    let mut sweeps = Vec::new();
    let mut halving_worst: f64 = 0.0;
    for (m, n) in SHAPES {
        let inst = generate(m, n, FIXED_SEED);
        let model = compile(&inst, &PenaltyConfig::default_for(&inst));
        let ground = brute_force_ising(&model).unwrap().index;
        let hb = build_initial_hamiltonian(m * n).unwrap();
        let hf = build_final_hamiltonian_quadratic(&model).unwrap();
        let opts = EvolveOptions {
            norm_tol: DRIFT_TOL,
            ..EvolveOptions::default()
        };
        let mut sweep = Sweep {
            shape: (m, n),
            ground_populations: Vec::new(),
            argmax_matches: Vec::new(),
            max_drift: 0.0,
        };
        for t in SWEEP {
            let schedule = Schedule::with_default_steps(t, &hf, 25).unwrap();
            let (psi, trace) = evolve(&hb, &hf, &schedule, &opts).expect("drift within tolerance");
            assert_eq!(trace.ground_state, ground);
            sweep.ground_populations.push(psi.probabilities()[ground.0 as usize]);
            sweep.argmax_matches.push(psi.argmax() == ground);
            sweep.max_drift = sweep.max_drift.max(trace.max_norm_drift);
            if t == 20.0 {
                let (fine, fine_trace) = evolve(&hb, &hf, &schedule.refined(), &opts).unwrap();
                sweep.max_drift = sweep.max_drift.max(fine_trace.max_norm_drift);
                let d = psi
                    .probabilities()
                    .iter()
                    .zip(fine.probabilities())
                    .map(|(p, q)| (p - q).abs())
                    .fold(0.0, f64::max);
                halving_worst = halving_worst.max(d);
            }
        }
        sweeps.push(sweep);
    }
    let drift = sweeps.iter().map(|s| s.max_drift).fold(0.0, f64::max);
    r.line(
        4,
        "norm conservation",
        drift <= DRIFT_TOL && halving_worst < HALVING_TOL,
        format!(
            "max drift {drift:.1e} (tol {DRIFT_TOL:e}); step halving at T_a = 20 moves populations by {halving_worst:.1e} (tol {HALVING_TOL:e})"
        ),
    );
    sweeps
}

fn gaps(r: &mut Report) {
    let mut all_open = true;
    let mut parts = Vec::new();
    for (m, n) in SHAPES {
        let inst = generate(m, n, FIXED_SEED);
        let hb = build_initial_hamiltonian(m * n).unwrap();
        let hf = build_final_hamiltonian_quadratic(&compile(&inst, &PenaltyConfig::default_for(&inst)))
            .unwrap();
        let total = 40.0;
        let tr = spectrum(&hb, &hf, &uniform_times(total, 25), total, &SpectrumOptions::default())
            .expect("eigensolver converges");
        all_open &= tr.gaps().iter().all(|&g| g > 0.0);
        let (t, g) = tr.min_gap().unwrap();
        parts.push(format!("{m}x{n} min gap {g:.4} at t/T_a = {:.3}", t / total));
    }
    r.line(5, "spectral gap", all_open, parts.join(", "));
}

fn convergence(r: &mut Report, sweeps: &[Sweep]) {
    let mut pass = true;
    let mut parts = Vec::new();
    for s in sweeps {
        let hit = SWEEP
            .iter()
            .zip(s.argmax_matches.iter().zip(&s.ground_populations))
            .find(|(_, (&ok, &p))| ok && p > CONVERGED_POPULATION);
        pass &= hit.is_some();
        parts.push(match hit {
            Some((t, (_, p))) => format!("{}x{} T_a = {t} (p = {p:.3})", s.shape.0, s.shape.1),
            None => format!("{}x{} none", s.shape.0, s.shape.1),
        });
    }
    r.line(6, "adiabatic convergence", pass, parts.join(", "));
}

fn trend(r: &mut Report, sweeps: &[Sweep]) {
    let mut pass = true;
    let mut parts = Vec::new();
    for s in sweeps {
        pass &= non_decreasing_within(&s.ground_populations, TREND_TOL);
        let p: Vec<String> = s.ground_populations.iter().map(|p| format!("{p:.3}")).collect();
        parts.push(format!("{}x{} [{}]", s.shape.0, s.shape.1, p.join(" ")));
    }
    r.line(10, "adiabatic trend", pass, parts.join(", "));
}

fn populations(r: &mut Report) {
    let mut violations = 0;
    let mut ce_parts = Vec::new();
    let mut ce_pass = true;
    let mut approx_parts = Vec::new();
    for (m, n) in SHAPES {
        let mut ce_hits = 0;
        let mut approx_hits = 0;
        for seed in 0..POPULATION {
            let inst = generate(m, n, seed);
            let exact = brute_force_wta(&inst).unwrap();
            let ground = brute_force_ising(&compile(&inst, &PenaltyConfig::default_for(&inst))).unwrap();
            violations += !Assignment::decode(ground.index, m, n).unwrap().is_feasible() as usize;
            approx_hits += (ground.index == exact.index) as usize;
            let ce = cross_entropy_wta(&inst, &CeParams::with_seed(seed)).unwrap();
            ce_hits += (ce.index == exact.index) as usize;
        }
        ce_pass &= ce_hits >= CE_REQUIRED;
        ce_parts.push(format!("{m}x{n} {ce_hits}/{POPULATION}"));
        approx_parts.push(format!("{m}x{n} {:.2}", approx_hits as f64 / POPULATION as f64));
    }
    r.line(
        7,
        "constraint adherence",
        violations == 0,
        format!("{violations} infeasible ground states over 3 x {POPULATION} instances"),
    );
    r.line(8, "cross-entropy validation", ce_pass, format!("{} (need >= {CE_REQUIRED})", ce_parts.join(", ")));
    r.info(
        9,
        "approximation quality",
        format!("fraction of quadratic ground states equal to the exact optimum: {}", approx_parts.join(", ")),
    );
}

fn main() -> ExitCode {
    // libtest flags such as --nocapture may be passed through; nothing to parse
    let start = Instant::now();
    let mut r = Report { failures: 0 };
    encoding(&mut r);
    basis_change(&mut r);
    diagonal_oracle(&mut r);
    let sweeps = anneal(&mut r);
    gaps(&mut r);
    convergence(&mut r, &sweeps);
    populations(&mut r);
    trend(&mut r, &sweeps);
    println!(
        "{} criteria failed, {:.0} s",
        r.failures,
        start.elapsed().as_secs_f64()
    );
    if r.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
