//! Static target-based weapon-target assignment problems.
//!
//! An instance has `m` weapons and `n` targets. Target `j` carries a threat
//! value `V_j` and weapon `i` destroys it with probability `p_ij`. The surviving
//! threat of a decision matrix `x` is
//!
//! ```text
//! T(x) = sum_j V_j * prod_i (1 - p_ij)^x_ij
//! ```
//!
//! Every decision entry is one qubit. Sites are numbered column-major with the
//! weapon index running fastest, so entry `(i, j)` (0-based) lives on bit
//! `m * j + i` of the basis index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bit position of decision entry `(weapon, target)` for an instance with `m` weapons.
#[inline]
pub fn site_index(m: usize, weapon: usize, target: usize) -> usize {
    m * target + weapon
}

#[derive(Debug, Clone, PartialEq)]
pub struct WtaInstance {
    m: usize,
    n: usize,
    values: Vec<f64>,
    probs: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    m: usize,
    n: usize,
    values: Vec<f64>,
    probs: Vec<Vec<f64>>,
}

impl WtaInstance {
    /// Builds an instance from threat values (length `n`) and a probability
    /// matrix indexed `probs[weapon][target]`.
    pub fn new(values: Vec<f64>, probs: Vec<Vec<f64>>) -> Result<Self> {
        let doc = InstanceDoc {
            m: probs.len(),
            n: values.len(),
            values,
            probs,
        };
        Self::from_doc(doc)
    }

    fn from_doc(doc: InstanceDoc) -> Result<Self> {
        let InstanceDoc { m, n, values, probs } = doc;
        if m == 0 {
            return Err(Error::InvalidField {
                path: "m".into(),
                reason: "need at least one weapon".into(),
            });
        }
        if n == 0 {
            return Err(Error::InvalidField {
                path: "n".into(),
                reason: "need at least one target".into(),
            });
        }
        if values.len() != n {
            return Err(Error::InvalidField {
                path: "values".into(),
                reason: format!("expected {n} entries, found {}", values.len()),
            });
        }
        for (j, &v) in values.iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidField {
                    path: format!("values[{j}]"),
                    reason: format!("threat value must be positive, found {v}"),
                });
            }
        }
        if probs.len() != m {
            return Err(Error::InvalidField {
                path: "probs".into(),
                reason: format!("expected {m} rows, found {}", probs.len()),
            });
        }
        for (i, row) in probs.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidField {
                    path: format!("probs[{i}]"),
                    reason: format!("expected {n} columns, found {}", row.len()),
                });
            }
            for (j, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidField {
                        path: format!("probs[{i}][{j}]"),
                        reason: format!("probability must lie in [0, 1], found {p}"),
                    });
                }
            }
        }
        Ok(Self { m, n, values, probs })
    }

    pub fn weapons(&self) -> usize {
        self.m
    }

    pub fn targets(&self) -> usize {
        self.n
    }

    /// Number of qubits `N = m * n`.
    pub fn num_sites(&self) -> usize {
        self.m * self.n
    }

    /// State-space dimension `K = 2^N`.
    pub fn dimension(&self) -> u64 {
        1u64 << self.num_sites()
    }

    pub fn value(&self, target: usize) -> f64 {
        self.values[target]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn prob(&self, weapon: usize, target: usize) -> f64 {
        self.probs[weapon][target]
    }

    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn total_value(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Surviving threat value of `a`. Feasibility is not checked.
    pub fn objective(&self, a: &Assignment) -> Result<f64> {
        if a.weapons() != self.m || a.targets() != self.n {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", self.m, self.n),
                actual: format!("{}x{}", a.weapons(), a.targets()),
            });
        }
        Ok(self.objective_unchecked(a))
    }

    pub(crate) fn objective_unchecked(&self, a: &Assignment) -> f64 {
        (0..self.n)
            .map(|j| {
                let survival: f64 = (0..self.m)
                    .filter(|&i| a.get(i, j))
                    .map(|i| 1.0 - self.probs[i][j])
                    .product();
                self.values[j] * survival
            })
            .sum()
    }

    /// Objective of the assignment encoded by basis index `k`.
    pub fn objective_of_index(&self, k: u64) -> f64 {
        (0..self.n)
            .map(|j| {
                let mut survival = 1.0;
                for i in 0..self.m {
                    if k >> site_index(self.m, i, j) & 1 == 1 {
                        survival *= 1.0 - self.probs[i][j];
                    }
                }
                self.values[j] * survival
            })
            .sum()
    }

    pub fn to_json(&self) -> String {
        let doc = InstanceDoc {
            m: self.m,
            n: self.n,
            values: self.values.clone(),
            probs: self.probs.clone(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("instance serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDoc =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_doc(doc)
    }

    /// Draws a random instance. Identical seeds give identical instances.
    pub fn generate(m: usize, n: usize, seed: u64, config: &GeneratorConfig) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidInstance(format!(
                "dimensions must be positive, got {m}x{n}"
            )));
        }
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| {
            if lo == hi {
                lo
            } else {
                rng.gen_range(lo..=hi)
            }
        };
        let values: Vec<f64> = (0..n).map(|_| draw(&mut rng, config.value_range)).collect();
        let mut probs = Vec::with_capacity(m);
        for _ in 0..m {
            let mut row: Vec<f64> = (0..n).map(|_| draw(&mut rng, config.prob_range)).collect();
            let hot = rng.gen_range(0..n);
            row[hot] = draw(&mut rng, config.large_prob_range);
            probs.push(row);
        }
        Self::new(values, probs)
    }

    /// Whether every weapon row has at least one probability at or above `threshold`.
    pub fn every_row_has_large_prob(&self, threshold: f64) -> bool {
        self.probs
            .iter()
            .all(|row| row.iter().any(|&p| p >= threshold))
    }
}

/// Ranges used by [`WtaInstance::generate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    /// Threat values are drawn uniformly from this range.
    pub value_range: (f64, f64),
    /// Ordinary kill probabilities.
    pub prob_range: (f64, f64),
    /// One entry per weapon row is redrawn from this range.
    pub large_prob_range: (f64, f64),
    /// What counts as a "very large" kill probability.
    pub large_threshold: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            value_range: (0.5, 1.5),
            prob_range: (0.05, 0.85),
            large_prob_range: (0.9, 0.99),
            large_threshold: 0.9,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let ordered = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo <= hi;
        let unit = |(lo, hi): (f64, f64)| (0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi);
        if !ordered(self.value_range) || self.value_range.0 <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "value_range {:?} must be an ordered positive range",
                self.value_range
            )));
        }
        if !ordered(self.prob_range) || !unit(self.prob_range) {
            return Err(Error::InvalidConfig(format!(
                "prob_range {:?} must be an ordered range within [0, 1]",
                self.prob_range
            )));
        }
        if !ordered(self.large_prob_range) || !unit(self.large_prob_range) {
            return Err(Error::InvalidConfig(format!(
                "large_prob_range {:?} must be an ordered range within [0, 1]",
                self.large_prob_range
            )));
        }
        if self.large_prob_range.0 < self.large_threshold {
            return Err(Error::InvalidConfig(format!(
                "large_prob_range {:?} starts below large_threshold {}",
                self.large_prob_range, self.large_threshold
            )));
        }
        Ok(())
    }
}

/// Binary decision matrix `x_ij`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    m: usize,
    n: usize,
    // row-major, weapon by target
    bits: Vec<bool>,
}

impl Assignment {
    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            bits: vec![false; m * n],
        }
    }

    /// Builds an assignment from `rows[weapon][target]` with entries 0 or 1.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut a = Self::zeros(m, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: format!("{n} columns"),
                    actual: format!("{} columns in row {i}", row.len()),
                });
            }
            for (j, &x) in row.iter().enumerate() {
                match x {
                    0 => {}
                    1 => a.set(i, j, true),
                    other => {
                        return Err(Error::InvalidField {
                            path: format!("x[{i}][{j}]"),
                            reason: format!("decision entries are 0 or 1, found {other}"),
                        })
                    }
                }
            }
        }
        Ok(a)
    }

    pub fn weapons(&self) -> usize {
        self.m
    }

    pub fn targets(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, weapon: usize, target: usize) -> bool {
        self.bits[weapon * self.n + target]
    }

    #[inline]
    pub fn set(&mut self, weapon: usize, target: usize, on: bool) {
        self.bits[weapon * self.n + target] = on;
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        (0..self.m)
            .map(|i| (0..self.n).map(|j| u8::from(self.get(i, j))).collect())
            .collect()
    }

    /// Every weapon engages at most one target.
    pub fn is_feasible(&self) -> bool {
        (0..self.m).all(|i| (0..self.n).filter(|&j| self.get(i, j)).count() <= 1)
    }

    /// Number of same-row pairs of engagements, i.e. constraint violations
    /// counted pairwise.
    pub fn double_assignment_pairs(&self) -> usize {
        (0..self.m)
            .map(|i| {
                let c = (0..self.n).filter(|&j| self.get(i, j)).count();
                c * c.saturating_sub(1) / 2
            })
            .sum()
    }

    pub fn encode(&self) -> BasisIndex {
        let mut k = 0u64;
        for i in 0..self.m {
            for j in 0..self.n {
                if self.get(i, j) {
                    k |= 1 << site_index(self.m, i, j);
                }
            }
        }
        BasisIndex(k)
    }

    pub fn decode(k: BasisIndex, m: usize, n: usize) -> Result<Self> {
        let num_sites = m * n;
        if num_sites >= 64 || k.0 >> num_sites != 0 {
            return Err(Error::IndexOutOfRange {
                index: k.0,
                num_sites,
            });
        }
        let mut a = Self::zeros(m, n);
        for i in 0..m {
            for j in 0..n {
                a.set(i, j, k.0 >> site_index(m, i, j) & 1 == 1);
            }
        }
        Ok(a)
    }

    /// Bits in site order, the layout used by spin models.
    pub fn to_bitstring(&self) -> Vec<u8> {
        let k = self.encode().0;
        (0..self.m * self.n).map(|s| (k >> s & 1) as u8).collect()
    }
}

/// Position of a computational basis state, ascending-integer ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BasisIndex(pub u64);

impl BasisIndex {
    pub fn bits(self, num_sites: usize) -> Vec<u8> {
        (0..num_sites).map(|s| (self.0 >> s & 1) as u8).collect()
    }
}

impl From<u64> for BasisIndex {
    fn from(k: u64) -> Self {
        BasisIndex(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(p: f64) -> WtaInstance {
        WtaInstance::new(vec![1.0], vec![vec![p]]).unwrap()
    }

    #[test]
    fn objective_small_cases() {
        let inst = single(0.8);
        let idle = Assignment::from_rows(&[vec![0]]).unwrap();
        let engaged = Assignment::from_rows(&[vec![1]]).unwrap();
        assert_eq!(inst.objective(&idle).unwrap(), 1.0);
        assert!((inst.objective(&engaged).unwrap() - 0.2).abs() < 1e-15);

        let two = WtaInstance::new(vec![1.0], vec![vec![0.5], vec![0.5]]).unwrap();
        let both = Assignment::from_rows(&[vec![1], vec![1]]).unwrap();
        assert_eq!(two.objective(&both).unwrap(), 0.25);
    }

    #[test]
    fn objective_rejects_wrong_shape() {
        let inst = single(0.8);
        let a = Assignment::zeros(2, 1);
        assert!(matches!(
            inst.objective(&a),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn feasibility() {
        assert!(Assignment::zeros(3, 4).is_feasible());
        assert!(!Assignment::from_rows(&[vec![1, 1]]).unwrap().is_feasible());
        assert!(Assignment::from_rows(&[vec![1, 0], vec![0, 1]])
            .unwrap()
            .is_feasible());
    }

    #[test]
    fn encoding_examples() {
        assert_eq!(Assignment::zeros(2, 2).encode(), BasisIndex(0));
        let mut a = Assignment::zeros(2, 2);
        a.set(1, 0, true);
        assert_eq!(a.encode(), BasisIndex(2));
        let mut b = Assignment::zeros(2, 2);
        b.set(0, 1, true);
        assert_eq!(b.encode(), BasisIndex(4));
    }

    #[test]
    fn decode_extremes_and_range() {
        assert_eq!(
            Assignment::decode(BasisIndex(0), 3, 2).unwrap(),
            Assignment::zeros(3, 2)
        );
        let ones = Assignment::decode(BasisIndex((1 << 6) - 1), 3, 2).unwrap();
        assert!(ones.rows().iter().flatten().all(|&x| x == 1));
        assert!(matches!(
            Assignment::decode(BasisIndex(1 << 6), 3, 2),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn objective_of_index_matches_decoded() {
        let inst = WtaInstance::generate(3, 2, 5, &GeneratorConfig::default()).unwrap();
        for k in 0..inst.dimension() {
            let a = Assignment::decode(BasisIndex(k), 3, 2).unwrap();
            let direct = inst.objective(&a).unwrap();
            assert!((direct - inst.objective_of_index(k)).abs() < 1e-14);
        }
    }

    #[test]
    fn generated_instances() {
        let cfg = GeneratorConfig::default();
        let a = WtaInstance::generate(4, 3, 1, &cfg).unwrap();
        assert_eq!(a.num_sites(), 12);
        assert!(a.every_row_has_large_prob(0.9));
        assert_eq!(a, WtaInstance::generate(4, 3, 1, &cfg).unwrap());
        let b = WtaInstance::generate(2, 6, 1, &cfg).unwrap();
        assert_eq!(b.dimension(), 4096);
        assert!(WtaInstance::generate(0, 3, 1, &cfg).is_err());
        let bad = GeneratorConfig {
            prob_range: (0.5, 1.2),
            ..cfg
        };
        assert!(WtaInstance::generate(2, 2, 1, &bad).is_err());
    }

    #[test]
    fn json_round_trip_and_errors() {
        let inst = WtaInstance::generate(4, 3, 9, &GeneratorConfig::default()).unwrap();
        assert_eq!(WtaInstance::from_json(&inst.to_json()).unwrap(), inst);

        let bad = r#"{"m":1,"n":2,"values":[1.0,1.0],"probs":[[0.3,1.2]]}"#;
        match WtaInstance::from_json(bad) {
            Err(Error::InvalidField { path, .. }) => assert_eq!(path, "probs[0][1]"),
            other => panic!("unexpected {other:?}"),
        }
        let missing = r#"{"m":1,"n":1,"probs":[[0.3]]}"#;
        let err = WtaInstance::from_json(missing).unwrap_err();
        assert!(err.to_string().contains("values"), "{err}");
    }
}
