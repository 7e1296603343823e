//! Second-order spin models compiled from assignment problems.
//!
//! The exact surviving-threat Hamiltonian has products over whole columns and
//! is therefore of order `m` in the spins. The compiled model keeps only
//! two-spin blocks: for every weapon and every pair of targets a row block
//! (two survival terms plus the double-assignment penalty `C s s'`), and for
//! every target and every pair of weapons a column block
//! `V_j (1 - p s)(1 - p' s')`. Summing all blocks gives a quadratic model in
//! the 0/1 occupation variables, which converts exactly to `z = 1 - 2s` spins.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{site_index, WtaInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    /// Occupation variables `s in {0, 1}` (QUBO form).
    #[serde(rename = "sigma_s")]
    SigmaS,
    /// Spin variables `z in {+1, -1}` with `z = 1 - 2s` (Ising form).
    #[serde(rename = "sigma_z")]
    SigmaZ,
}

impl Basis {
    pub fn name(self) -> &'static str {
        match self {
            Basis::SigmaS => "sigma_s",
            Basis::SigmaZ => "sigma_z",
        }
    }
}

/// Energy per same-row pair of engagements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyConfig {
    pub c: f64,
}

impl PenaltyConfig {
    pub fn new(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "penalty must be positive, got {c}"
            )));
        }
        Ok(Self { c })
    }

    /// `2 * sum_j V_j * max(n, 2)`.
    pub fn default_for(inst: &WtaInstance) -> Self {
        Self {
            c: 2.0 * inst.total_value() * inst.targets().max(2) as f64,
        }
    }

    /// `sum_j V_j * n * m`, above which the compiled ground state is expected to be feasible.
    pub fn dominance_bound(inst: &WtaInstance) -> f64 {
        inst.total_value() * (inst.targets() * inst.weapons()) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompileOptions {
    pub penalty: PenaltyConfig,
    /// Divide each row block's survival terms by `n - 1` so every target's
    /// linear term is counted once per row instead of once per pair.
    pub normalize_row_linear: bool,
}

impl CompileOptions {
    pub fn new(penalty: PenaltyConfig) -> Self {
        Self {
            penalty,
            normalize_row_linear: false,
        }
    }
}

/// `offset + sum_i h_i x_i + sum_{i<j} J_ij x_i x_j` in either basis.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSpinModel {
    num_sites: usize,
    basis: Basis,
    offset: f64,
    linear: BTreeMap<usize, f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
}

impl QuadraticSpinModel {
    pub fn new(num_sites: usize, basis: Basis) -> Self {
        Self {
            num_sites,
            basis,
            offset: 0.0,
            linear: BTreeMap::new(),
            quadratic: BTreeMap::new(),
        }
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn linear(&self) -> &BTreeMap<usize, f64> {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn linear_coeff(&self, site: usize) -> f64 {
        self.linear.get(&site).copied().unwrap_or(0.0)
    }

    pub fn quadratic_coeff(&self, a: usize, b: usize) -> f64 {
        let key = if a < b { (a, b) } else { (b, a) };
        self.quadratic.get(&key).copied().unwrap_or(0.0)
    }

    pub fn add_offset(&mut self, v: f64) {
        self.offset += v;
    }

    pub fn add_linear(&mut self, site: usize, v: f64) {
        assert!(site < self.num_sites, "site {site} out of range");
        if v != 0.0 {
            *self.linear.entry(site).or_insert(0.0) += v;
        }
    }

    /// Adds a coupling; `a == b` is folded into the linear term since `x^2 = x` for
    /// occupation variables and `z^2 = 1` for spins.
    pub fn add_quadratic(&mut self, a: usize, b: usize, v: f64) {
        assert!(a < self.num_sites && b < self.num_sites, "pair ({a}, {b}) out of range");
        if v == 0.0 {
            return;
        }
        if a == b {
            match self.basis {
                Basis::SigmaS => self.add_linear(a, v),
                Basis::SigmaZ => self.add_offset(v),
            }
            return;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        *self.quadratic.entry(key).or_insert(0.0) += v;
    }

    fn prune(&mut self) {
        self.linear.retain(|_, v| *v != 0.0);
        self.quadratic.retain(|_, v| *v != 0.0);
    }

    /// Classical energy of a bitstring in site order. In the `SigmaZ` basis
    /// the bits map to spins as `z = 1 - 2s`, so both forms of one model give
    /// the same number for the same bitstring.
    pub fn energy(&self, bits: &[u8]) -> Result<f64> {
        if bits.len() != self.num_sites {
            return Err(Error::DimensionMismatch {
                expected: format!("{} bits", self.num_sites),
                actual: format!("{} bits", bits.len()),
            });
        }
        let var = |s: usize| -> f64 {
            let b = f64::from(bits[s] & 1);
            match self.basis {
                Basis::SigmaS => b,
                Basis::SigmaZ => 1.0 - 2.0 * b,
            }
        };
        Ok(self.sum_terms(var))
    }

    fn sum_terms(&self, var: impl Fn(usize) -> f64) -> f64 {
        // penalty terms dwarf the objective terms, so plain summation loses
        // more than the basis round trip is allowed to
        compensated_sum(
            std::iter::once(self.offset)
                .chain(self.linear.iter().map(|(&s, &h)| h * var(s)))
                .chain(self.quadratic.iter().map(|(&(a, b), &j)| j * var(a) * var(b))),
        )
    }

    /// Energy of the bitstring whose site `s` is bit `s` of `k`.
    pub fn energy_of_index(&self, k: u64) -> f64 {
        let var = |s: usize| -> f64 {
            let b = (k >> s & 1) as f64;
            match self.basis {
                Basis::SigmaS => b,
                Basis::SigmaZ => 1.0 - 2.0 * b,
            }
        };
        self.sum_terms(var)
    }

    /// Exact change of variables `s = (1 - z) / 2`.
    pub fn to_ising(&self) -> Result<Self> {
        if self.basis != Basis::SigmaS {
            return Err(Error::WrongBasis {
                expected: Basis::SigmaS.name(),
                actual: self.basis.name(),
            });
        }
        let mut offset = vec![self.offset];
        let mut linear: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for (&s, &h) in &self.linear {
            offset.push(h / 2.0);
            linear.entry(s).or_default().push(-h / 2.0);
        }
        let mut out = Self::new(self.num_sites, Basis::SigmaZ);
        for (&(a, b), &j) in &self.quadratic {
            let q = j / 4.0;
            offset.push(q);
            linear.entry(a).or_default().push(-q);
            linear.entry(b).or_default().push(-q);
            out.add_quadratic(a, b, q);
        }
        out.offset = compensated_sum(offset);
        for (s, terms) in linear {
            out.add_linear(s, compensated_sum(terms));
        }
        out.prune();
        Ok(out)
    }

    /// Couplings and fields in the hardware sign convention
    /// `H = -sum J_ij z_i z_j - sum h_i z_i` (unit magnetic moment).
    pub fn hardware_couplings(&self) -> Result<(Vec<(usize, usize, f64)>, Vec<(usize, f64)>)> {
        if self.basis != Basis::SigmaZ {
            return Err(Error::WrongBasis {
                expected: Basis::SigmaZ.name(),
                actual: self.basis.name(),
            });
        }
        let j = self.quadratic.iter().map(|(&(a, b), &v)| (a, b, -v)).collect();
        let h = self.linear.iter().map(|(&s, &v)| (s, -v)).collect();
        Ok((j, h))
    }

    pub fn num_linear_terms(&self) -> usize {
        self.linear.len()
    }

    pub fn num_quadratic_terms(&self) -> usize {
        self.quadratic.len()
    }

    /// Sparse triplet document, entries sorted by site then by pair.
    pub fn to_json(&self) -> String {
        let doc = CoefficientDoc {
            basis: self.basis,
            num_sites: self.num_sites,
            offset: self.offset,
            linear: self.linear.iter().map(|(&s, &v)| (s, v)).collect(),
            quadratic: self.quadratic.iter().map(|(&(a, b), &v)| (a, b, v)).collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CoefficientDoc =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut model = Self::new(doc.num_sites, doc.basis);
        model.offset = doc.offset;
        for (idx, (s, v)) in doc.linear.into_iter().enumerate() {
            if s >= doc.num_sites {
                return Err(Error::InvalidField {
                    path: format!("linear[{idx}]"),
                    reason: format!("site {s} out of range"),
                });
            }
            if model.linear.insert(s, v).is_some() {
                return Err(Error::InvalidField {
                    path: format!("linear[{idx}]"),
                    reason: format!("duplicate site {s}"),
                });
            }
        }
        for (idx, (a, b, v)) in doc.quadratic.into_iter().enumerate() {
            if a >= b || b >= doc.num_sites {
                return Err(Error::InvalidField {
                    path: format!("quadratic[{idx}]"),
                    reason: format!("pair ({a}, {b}) must satisfy i < j < num_sites"),
                });
            }
            if model.quadratic.insert((a, b), v).is_some() {
                return Err(Error::InvalidField {
                    path: format!("quadratic[{idx}]"),
                    reason: format!("duplicate pair ({a}, {b})"),
                });
            }
        }
        Ok(model)
    }
}

#[derive(Serialize, Deserialize)]
struct CoefficientDoc {
    basis: Basis,
    num_sites: usize,
    offset: f64,
    linear: Vec<(usize, f64)>,
    quadratic: Vec<(usize, usize, f64)>,
}

/// Neumaier summation.
fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for x in terms {
        let t = sum + x;
        carry += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + carry
}

/// Compiles with the literal block sum and the given penalty.
pub fn compile(inst: &WtaInstance, penalty: &PenaltyConfig) -> QuadraticSpinModel {
    compile_with(inst, &CompileOptions::new(*penalty))
}

pub fn compile_with(inst: &WtaInstance, opts: &CompileOptions) -> QuadraticSpinModel {
    let (m, n) = (inst.weapons(), inst.targets());
    let c = opts.penalty.c;
    let mut model = QuadraticSpinModel::new(m * n, Basis::SigmaS);

    if m < 2 && n < 2 {
        model.add_offset(inst.value(0));
        model.add_linear(0, -inst.value(0) * inst.prob(0, 0));
        return model;
    }

    let row_scale = if opts.normalize_row_linear && n > 1 {
        1.0 / (n - 1) as f64
    } else {
        1.0
    };

    // rows: V_j (1 - p_ij s_ij) + V_j' (1 - p_ij' s_ij') + C s_ij s_ij'
    for i in 0..m {
        for j in 1..n {
            for jp in 0..j {
                for t in [j, jp] {
                    let v = inst.value(t) * row_scale;
                    model.add_offset(v);
                    model.add_linear(site_index(m, i, t), -v * inst.prob(i, t));
                }
                model.add_quadratic(site_index(m, i, j), site_index(m, i, jp), c);
            }
        }
    }

    // columns: V_j (1 - p_ij s_ij)(1 - p_i'j s_i'j)
    for j in 0..n {
        let v = inst.value(j);
        for i in 1..m {
            for ip in 0..i {
                let (a, b) = (site_index(m, i, j), site_index(m, ip, j));
                let (pa, pb) = (inst.prob(i, j), inst.prob(ip, j));
                model.add_offset(v);
                model.add_linear(a, -v * pa);
                model.add_linear(b, -v * pb);
                model.add_quadratic(a, b, v * pa * pb);
            }
        }
    }

    model.prune();
    model
}

/// Upper bound `m n (n-1)/2 + n m (m-1)/2` on the number of couplings in a compiled model.
pub fn structural_pair_bound(m: usize, n: usize) -> usize {
    m * n * n.saturating_sub(1) / 2 + n * m * m.saturating_sub(1) / 2
}
