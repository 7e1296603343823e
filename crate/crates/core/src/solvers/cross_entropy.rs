//! Cross-entropy search over feasible assignments.
//!
//! Each weapon draws from its own categorical distribution over
//! `{idle, target 1, ..., target n}`, so every sample satisfies the
//! one-target-per-weapon constraint. After scoring a batch, the distribution
//! moves toward the empirical frequencies of the elite fraction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Assignment, BasisIndex, WtaInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CeParams {
    pub samples: usize,
    pub elite_fraction: f64,
    pub smoothing: f64,
    pub max_iterations: usize,
    /// Stop once no probability moves by more than this in one iteration.
    pub convergence_threshold: f64,
    pub seed: u64,
}

impl Default for CeParams {
    fn default() -> Self {
        Self {
            samples: 500,
            elite_fraction: 0.1,
            smoothing: 0.7,
            max_iterations: 200,
            convergence_threshold: 1e-3,
            seed: 0,
        }
    }
}

impl CeParams {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 10 {
            return Err(Error::InvalidConfig(format!(
                "need at least 10 samples per iteration, got {}",
                self.samples
            )));
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "elite fraction must lie in (0, 1), got {}",
                self.elite_fraction
            )));
        }
        if !(self.smoothing > 0.0 && self.smoothing <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "smoothing must lie in (0, 1], got {}",
                self.smoothing
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("need at least one iteration".into()));
        }
        if !(self.convergence_threshold >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "convergence threshold must be non-negative, got {}",
                self.convergence_threshold
            )));
        }
        Ok(())
    }

    fn elite_count(&self) -> usize {
        ((self.elite_fraction * self.samples as f64).ceil() as usize).clamp(1, self.samples)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CeResult {
    pub assignment: Assignment,
    pub index: BasisIndex,
    pub objective: f64,
    pub iterations: usize,
    pub samples_drawn: usize,
    /// Best objective seen so far, after each iteration.
    pub best_history: Vec<f64>,
    /// Final per-weapon probabilities, column 0 is "idle".
    pub distribution: Vec<Vec<f64>>,
}

pub fn cross_entropy_wta(inst: &WtaInstance, params: &CeParams) -> Result<CeResult> {
    params.validate()?;
    let (m, n) = (inst.weapons(), inst.targets());
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut dist = vec![vec![1.0 / (n + 1) as f64; n + 1]; m];
    let elite = params.elite_count();

    let mut best: Option<(f64, BasisIndex, Assignment)> = None;
    let mut history = Vec::new();
    let mut batch: Vec<(f64, BasisIndex, Vec<usize>)> = Vec::with_capacity(params.samples);
    let mut iterations = 0;

    for _ in 0..params.max_iterations {
        iterations += 1;
        batch.clear();
        for _ in 0..params.samples {
            let choice: Vec<usize> = dist.iter().map(|row| sample_categorical(&mut rng, row)).collect();
            let a = to_assignment(&choice, m, n);
            let k = a.encode();
            batch.push((inst.objective_unchecked(&a), k, choice));
        }
        batch.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

        let (t, k, choice) = &batch[0];
        let improves = match &best {
            None => true,
            Some((bt, bk, _)) => t < bt || (t == bt && k < bk),
        };
        if improves {
            best = Some((*t, *k, to_assignment(choice, m, n)));
        }
        history.push(best.as_ref().map_or(f64::INFINITY, |b| b.0));

        let mut counts = vec![vec![0.0; n + 1]; m];
        for (_, _, choice) in &batch[..elite] {
            for (i, &c) in choice.iter().enumerate() {
                counts[i][c] += 1.0;
            }
        }
        let mut max_change: f64 = 0.0;
        for (row, freq) in dist.iter_mut().zip(&counts) {
            for (p, &f) in row.iter_mut().zip(freq) {
                let updated = params.smoothing * f / elite as f64 + (1.0 - params.smoothing) * *p;
                max_change = max_change.max((updated - *p).abs());
                *p = updated;
            }
        }
        if max_change < params.convergence_threshold {
            break;
        }
    }

    let (objective, index, assignment) = best.expect("at least one iteration ran");
    Ok(CeResult {
        assignment,
        index,
        objective,
        iterations,
        samples_drawn: iterations * params.samples,
        best_history: history,
        distribution: dist,
    })
}

fn sample_categorical(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (c, &p) in probs.iter().enumerate() {
        if u < p {
            return c;
        }
        u -= p;
    }
    // rounding fallback: last category with mass
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

fn to_assignment(choice: &[usize], m: usize, n: usize) -> Assignment {
    let mut a = Assignment::zeros(m, n);
    for (i, &c) in choice.iter().enumerate() {
        if c > 0 {
            a.set(i, c - 1, true);
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::GeneratorConfig;
    use crate::solvers::brute_force_wta;

    #[test]
    fn two_point_space() {
        let inst = WtaInstance::new(vec![1.0], vec![vec![0.99]]).unwrap();
        let res = cross_entropy_wta(&inst, &CeParams::with_seed(3)).unwrap();
        assert_eq!(res.assignment.rows(), vec![vec![1]]);
        assert!(res.distribution[0][1] > 0.99);
    }

    #[test]
    fn history_is_monotone_and_result_feasible() {
        let inst = WtaInstance::generate(4, 3, 11, &GeneratorConfig::default()).unwrap();
        let res = cross_entropy_wta(&inst, &CeParams::with_seed(11)).unwrap();
        assert!(res.best_history.windows(2).all(|w| w[1] <= w[0]));
        assert!(res.assignment.is_feasible());
        assert_eq!(res.samples_drawn, res.iterations * 500);
        let exact = brute_force_wta(&inst).unwrap();
        assert!(res.objective >= exact.objective - 1e-12);
    }

    #[test]
    fn deterministic_for_seed() {
        let inst = WtaInstance::generate(3, 3, 2, &GeneratorConfig::default()).unwrap();
        let a = cross_entropy_wta(&inst, &CeParams::with_seed(5)).unwrap();
        let b = cross_entropy_wta(&inst, &CeParams::with_seed(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_degenerate_params() {
        let inst = WtaInstance::new(vec![1.0], vec![vec![0.5]]).unwrap();
        for bad in [
            CeParams { samples: 5, ..CeParams::default() },
            CeParams { elite_fraction: 1.0, ..CeParams::default() },
            CeParams { smoothing: 0.0, ..CeParams::default() },
            CeParams { max_iterations: 0, ..CeParams::default() },
        ] {
            assert!(matches!(cross_entropy_wta(&inst, &bad), Err(Error::InvalidConfig(_))));
        }
    }
}
