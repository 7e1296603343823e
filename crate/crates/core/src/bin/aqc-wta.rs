use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use aqc_wta::commands::{self, BasisChoice, FinalHamiltonian, RunConfig};
use aqc_wta::Result;

/// Weapon-target assignment on a simulated adiabatic quantum annealer.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (falls back to the config, then $AQC_WTA_OUT, then ./out).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Print the full report as JSON instead of the summary.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct InstanceArgs {
    /// Instance file; without it an instance is generated from the config.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Weapons, for generated instances.
    #[arg(short, long)]
    m: Option<usize>,
    /// Targets, for generated instances.
    #[arg(short, long)]
    n: Option<usize>,
    /// Penalty per double assignment.
    #[arg(long)]
    penalty: Option<f64>,
    /// Divide row-pair linear terms by n - 1.
    #[arg(long)]
    normalize_row_linear: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    Qubo,
    Ising,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum FinalArg {
    Quadratic,
    Exact,
    Both,
}

impl FinalArg {
    fn kinds(self) -> Vec<FinalHamiltonian> {
        match self {
            FinalArg::Quadratic => vec![FinalHamiltonian::Quadratic],
            FinalArg::Exact => vec![FinalHamiltonian::Exact],
            FinalArg::Both => vec![FinalHamiltonian::Quadratic, FinalHamiltonian::Exact],
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random instance and write it as JSON.
    Generate {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Destination file (default <out-dir>/instance.json).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compile an instance into QUBO and/or Ising coefficients.
    Compile {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, value_enum, default_value = "both")]
        basis: BasisArg,
    },
    /// Exhaustive and cross-entropy classical solutions.
    Solve {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long)]
        ce_seed: Option<u64>,
        #[arg(long)]
        no_ce: bool,
        #[arg(long)]
        no_brute_force: bool,
    },
    /// Anneal the register and record populations.
    Simulate {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Annealing time; repeat for a sweep.
        #[arg(short = 't', long = "anneal-time")]
        anneal_time: Vec<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long = "final", value_enum)]
        final_hamiltonian: Option<FinalArg>,
        /// Keep every basis state in the population trace.
        #[arg(long)]
        full_trace: bool,
    },
    /// Lowest eigenvalues of H(t) along the schedule.
    Spectrum {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(short = 't', long = "anneal-time")]
        anneal_time: Option<f64>,
        #[arg(short, long)]
        k: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long = "final", value_enum)]
        final_hamiltonian: Option<FinalArg>,
        /// Also render an SVG plot.
        #[arg(long)]
        svg: bool,
    },
    /// Run the 4x3, 6x2 and 2x6 experiments end to end.
    ReproducePaper {
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn apply_instance(cfg: &mut RunConfig, a: &InstanceArgs) {
    if let Some(p) = &a.instance {
        cfg.instance = Some(p.clone());
    }
    if let Some(s) = a.seed {
        cfg.generator.seed = s;
    }
    if let Some(m) = a.m {
        cfg.generator.m = m;
    }
    if let Some(n) = a.n {
        cfg.generator.n = n;
    }
    if a.penalty.is_some() {
        cfg.penalty = a.penalty;
    }
    cfg.normalize_row_linear |= a.normalize_row_linear;
}

fn emit<T: Serialize + std::fmt::Display>(json: bool, report: &T) {
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(report).expect("report serializes")
        );
    } else {
        println!("{report}");
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if cli.out_dir.is_some() {
        cfg.output_dir = cli.out_dir.clone();
    }
    match &cli.command {
        Command::Generate { inst, .. }
        | Command::Compile { inst, .. }
        | Command::Solve { inst, .. }
        | Command::Simulate { inst, .. }
        | Command::Spectrum { inst, .. } => apply_instance(&mut cfg, inst),
        Command::ReproducePaper { seed } => {
            if let Some(s) = seed {
                cfg.generator.seed = *s;
            }
        }
    }
    let out = cfg.resolve_output_dir();

    match cli.command {
        Command::Generate { output, .. } => {
            // generating never reads an instance file
            cfg.instance = None;
            cfg.validate()?;
            let path = output.unwrap_or_else(|| out.join("instance.json"));
            emit(cli.json, &commands::generate(&cfg, &path)?);
        }
        Command::Compile { basis, .. } => {
            cfg.validate()?;
            let basis = match basis {
                BasisArg::Qubo => BasisChoice::Qubo,
                BasisArg::Ising => BasisChoice::Ising,
                BasisArg::Both => BasisChoice::Both,
            };
            emit(cli.json, &commands::compile(&cfg, basis, &out)?);
        }
        Command::Solve {
            ce_seed,
            no_ce,
            no_brute_force,
            ..
        } => {
            if let Some(s) = ce_seed {
                cfg.ce.seed = s;
            }
            if no_ce {
                cfg.solvers.ce = false;
            }
            if no_brute_force {
                cfg.solvers.wta = false;
                cfg.solvers.ising = false;
            }
            cfg.validate()?;
            emit(cli.json, &commands::solve(&cfg, &out)?);
        }
        Command::Simulate {
            anneal_time,
            steps,
            samples,
            final_hamiltonian,
            full_trace,
            ..
        } => {
            match anneal_time.as_slice() {
                [] => {}
                [t] => {
                    cfg.anneal_time = *t;
                    cfg.anneal_sweep.clear();
                }
                many => cfg.anneal_sweep = many.to_vec(),
            }
            if steps.is_some() {
                cfg.steps = steps;
            }
            if let Some(s) = samples {
                cfg.samples = s;
            }
            if let Some(f) = final_hamiltonian {
                cfg.final_hamiltonian = f.kinds();
            }
            cfg.full_trace |= full_trace;
            cfg.validate()?;
            emit(cli.json, &commands::simulate(&cfg, &out)?);
        }
        Command::Spectrum {
            anneal_time,
            k,
            samples,
            final_hamiltonian,
            svg,
            ..
        } => {
            if let Some(t) = anneal_time {
                cfg.anneal_time = t;
            }
            if let Some(k) = k {
                cfg.spectrum_k = k;
            }
            if let Some(s) = samples {
                cfg.spectrum_samples = s;
            }
            if let Some(f) = final_hamiltonian {
                cfg.final_hamiltonian = f.kinds();
            }
            cfg.validate()?;
            let reports = commands::spectrum_cmd(&cfg, svg, &out)?;
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&reports).expect("report serializes")
                );
            } else {
                for r in &reports {
                    println!("[{}]\n{r}", r.final_hamiltonian.name());
                }
            }
        }
        Command::ReproducePaper { .. } => {
            cfg.instance = None;
            cfg.validate()?;
            let report = commands::reproduce(&cfg, &out)?;
            emit(cli.json, &report);
            if !report.passed {
                return Err(aqc_wta::Error::CheckFailed(
                    "one or more experiments failed their checks".into(),
                ));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::FAILURE
        }
    }
}
