use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{GeneratorConfig, WtaInstance};
use crate::ising::{CompileOptions, PenaltyConfig};
use crate::solvers::CeParams;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "AQC_WTA_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FinalHamiltonian {
    /// Diagonal of the compiled two-spin model.
    Quadratic,
    /// Full objective plus pair penalties.
    Exact,
}

impl FinalHamiltonian {
    pub fn name(self) -> &'static str {
        match self {
            FinalHamiltonian::Quadratic => "quadratic",
            FinalHamiltonian::Exact => "exact",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorSpec {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub ranges: GeneratorConfig,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            m: 4,
            n: 3,
            seed: 1,
            ranges: GeneratorConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSelection {
    pub wta: bool,
    pub ising: bool,
    pub ce: bool,
}

impl Default for SolverSelection {
    fn default() -> Self {
        Self {
            wta: true,
            ising: true,
            ce: true,
        }
    }
}

/// Everything a command needs. Loaded from a JSON file, then overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Instance document; when absent the generator spec is used.
    pub instance: Option<PathBuf>,
    pub generator: GeneratorSpec,
    /// Penalty per double assignment; defaults to `2 * sum V * max(n, 2)`.
    pub penalty: Option<f64>,
    pub normalize_row_linear: bool,
    pub anneal_time: f64,
    /// Annealing times to sweep; empty means just `anneal_time`.
    pub anneal_sweep: Vec<f64>,
    /// Step count override; the default scales with the problem's energy scale.
    pub steps: Option<usize>,
    pub samples: usize,
    pub spectrum_k: usize,
    pub spectrum_samples: usize,
    pub final_hamiltonian: Vec<FinalHamiltonian>,
    pub full_trace: bool,
    pub trace_top: usize,
    pub solvers: SolverSelection,
    pub ce: CeParams,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            instance: None,
            generator: GeneratorSpec::default(),
            penalty: None,
            normalize_row_linear: false,
            anneal_time: 40.0,
            anneal_sweep: Vec::new(),
            steps: None,
            samples: 25,
            spectrum_k: 8,
            spectrum_samples: 25,
            final_hamiltonian: vec![FinalHamiltonian::Quadratic],
            full_trace: false,
            trace_top: 32,
            solvers: SolverSelection::default(),
            ce: CeParams::default(),
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(p) = &self.instance {
            if !p.exists() {
                return Err(Error::InvalidConfig(format!(
                    "instance file {} does not exist",
                    p.display()
                )));
            }
        } else {
            if self.generator.m == 0 || self.generator.n == 0 {
                return Err(Error::InvalidInstance(format!(
                    "dimensions must be positive, got {}x{}",
                    self.generator.m, self.generator.n
                )));
            }
            self.generator.ranges.validate()?;
        }
        if let Some(c) = self.penalty {
            PenaltyConfig::new(c)?;
        }
        for &t in self.anneal_times().iter() {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "annealing time must be positive, got {t}"
                )));
            }
        }
        if self.steps == Some(0) {
            return Err(Error::InvalidConfig("need at least one step".into()));
        }
        if self.final_hamiltonian.is_empty() {
            return Err(Error::InvalidConfig(
                "select at least one final Hamiltonian".into(),
            ));
        }
        self.ce.validate()?;
        Ok(())
    }

    pub fn anneal_times(&self) -> Vec<f64> {
        if self.anneal_sweep.is_empty() {
            vec![self.anneal_time]
        } else {
            self.anneal_sweep.clone()
        }
    }

    pub fn load_instance(&self) -> Result<WtaInstance> {
        match &self.instance {
            Some(p) => WtaInstance::from_json(&std::fs::read_to_string(p)?),
            None => WtaInstance::generate(
                self.generator.m,
                self.generator.n,
                self.generator.seed,
                &self.generator.ranges,
            ),
        }
    }

    pub fn penalty_for(&self, inst: &WtaInstance) -> Result<PenaltyConfig> {
        match self.penalty {
            Some(c) => PenaltyConfig::new(c),
            None => Ok(PenaltyConfig::default_for(inst)),
        }
    }

    pub fn compile_options(&self, inst: &WtaInstance) -> Result<CompileOptions> {
        Ok(CompileOptions {
            penalty: self.penalty_for(inst)?,
            normalize_row_linear: self.normalize_row_linear,
        })
    }

    /// Explicit setting, then the environment, then `./out`.
    pub fn resolve_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_documents_fill_defaults() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"generator": {"m": 2, "n": 6}, "anneal_time": 80}"#).unwrap();
        assert_eq!(cfg.generator.m, 2);
        assert_eq!(cfg.generator.seed, 1);
        assert_eq!(cfg.anneal_time, 80.0);
        assert_eq!(cfg.samples, 25);
        cfg.validate().unwrap();
    }

    #[test]
    fn validation_catches_bad_fields() {
        let missing = RunConfig {
            instance: Some(PathBuf::from("/definitely/not/here.json")),
            ..RunConfig::default()
        };
        assert!(missing.validate().is_err());
        let zero = RunConfig {
            generator: GeneratorSpec {
                m: 0,
                ..GeneratorSpec::default()
            },
            ..RunConfig::default()
        };
        assert!(zero.validate().is_err());
        let neg = RunConfig {
            penalty: Some(-1.0),
            ..RunConfig::default()
        };
        assert!(neg.validate().is_err());
    }
}
