//! Hamiltonians on the `2^N` dimensional computational basis.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::instance::{Assignment, BasisIndex, WtaInstance};
use crate::ising::{Basis, PenaltyConfig, QuadraticSpinModel};

/// Largest register the simulator accepts.
pub const MAX_SITES: usize = 16;

/// Compressed sparse rows with complex entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseMatrix {
    /// Builds from per-row `(column, value)` lists.
    pub fn from_rows(rows: Vec<Vec<(usize, Complex64)>>) -> Self {
        let dim = rows.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                assert!(c < dim, "column {c} out of range");
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(pos) => self.vals[span.start + pos],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// `max |A - A^dagger|` over stored entries and their mirrors.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r).conj()).norm());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Diagonal(Vec<f64>),
    Sparse(SparseMatrix),
}

/// Hermitian operator, stored either as its diagonal or as a sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    num_sites: usize,
    repr: Repr,
    // set when the operator is `-strength * sum_s sigma_x^s`
    transverse_field: Option<f64>,
}

impl Hamiltonian {
    pub fn diagonal(num_sites: usize, entries: Vec<f64>) -> Result<Self> {
        check_sites(num_sites)?;
        if entries.len() != 1 << num_sites {
            return Err(Error::DimensionMismatch {
                expected: format!("{} diagonal entries", 1usize << num_sites),
                actual: format!("{}", entries.len()),
            });
        }
        Ok(Self {
            num_sites,
            repr: Repr::Diagonal(entries),
            transverse_field: None,
        })
    }

    pub fn sparse(num_sites: usize, matrix: SparseMatrix) -> Result<Self> {
        check_sites(num_sites)?;
        if matrix.dim() != 1 << num_sites {
            return Err(Error::DimensionMismatch {
                expected: format!("dimension {}", 1usize << num_sites),
                actual: format!("{}", matrix.dim()),
            });
        }
        Ok(Self {
            num_sites,
            repr: Repr::Sparse(matrix),
            transverse_field: None,
        })
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.num_sites
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.repr, Repr::Diagonal(_))
    }

    pub fn diagonal_entries(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Diagonal(d) => Some(d),
            Repr::Sparse(_) => None,
        }
    }

    pub fn as_sparse(&self) -> Option<&SparseMatrix> {
        match &self.repr {
            Repr::Sparse(m) => Some(m),
            Repr::Diagonal(_) => None,
        }
    }

    /// Field strength `g` if this is `-g * sum_s sigma_x^s`.
    pub fn transverse_field_strength(&self) -> Option<f64> {
        self.transverse_field
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        match &self.repr {
            Repr::Diagonal(d) if r == c => Complex64::new(d[r], 0.0),
            Repr::Diagonal(_) => Complex64::new(0.0, 0.0),
            Repr::Sparse(m) => m.get(r, c),
        }
    }

    pub fn hermiticity_error(&self) -> f64 {
        match &self.repr {
            Repr::Diagonal(_) => 0.0,
            Repr::Sparse(m) => m.hermiticity_error(),
        }
    }

    /// `out += scale * H * x`.
    pub fn apply_add(&self, scale: f64, x: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(out.len(), self.dim());
        match &self.repr {
            Repr::Diagonal(d) => {
                for ((o, &xi), &di) in out.iter_mut().zip(x).zip(d) {
                    *o += xi * (scale * di);
                }
            }
            Repr::Sparse(m) => {
                for (r, o) in out.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (c, v) in m.row(r) {
                        acc += v * x[c];
                    }
                    *o += acc * scale;
                }
            }
        }
    }

    /// Real-symmetric version of [`apply_add`](Self::apply_add), valid when every entry is real.
    pub(crate) fn apply_add_real(&self, scale: f64, x: &[f64], out: &mut [f64]) {
        match &self.repr {
            Repr::Diagonal(d) => {
                for ((o, &xi), &di) in out.iter_mut().zip(x).zip(d) {
                    *o += scale * di * xi;
                }
            }
            Repr::Sparse(m) => {
                for (r, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (c, v) in m.row(r) {
                        acc += v.re * x[c];
                    }
                    *o += scale * acc;
                }
            }
        }
    }

    pub(crate) fn is_real(&self) -> bool {
        match &self.repr {
            Repr::Diagonal(_) => true,
            Repr::Sparse(m) => m.vals.iter().all(|v| v.im == 0.0),
        }
    }

    /// Bound on the spectral radius (largest absolute row sum).
    pub fn norm_bound(&self) -> f64 {
        match &self.repr {
            Repr::Diagonal(d) => d.iter().fold(0.0, |a: f64, &x| a.max(x.abs())),
            Repr::Sparse(m) => (0..m.dim())
                .map(|r| m.row(r).map(|(_, v)| v.norm()).sum::<f64>())
                .fold(0.0, f64::max),
        }
    }

    /// Dense copy, row major. Only sensible for small registers.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let k = self.dim();
        let mut out = vec![vec![Complex64::new(0.0, 0.0); k]; k];
        match &self.repr {
            Repr::Diagonal(d) => {
                for (r, &v) in d.iter().enumerate() {
                    out[r][r] = Complex64::new(v, 0.0);
                }
            }
            Repr::Sparse(m) => {
                for (r, row) in out.iter_mut().enumerate() {
                    for (c, v) in m.row(r) {
                        row[c] = v;
                    }
                }
            }
        }
        out
    }
}

fn check_sites(num_sites: usize) -> Result<()> {
    if num_sites == 0 || num_sites > MAX_SITES {
        return Err(Error::TooLarge {
            num_sites,
            ceiling: MAX_SITES,
            hint: "registers must have between 1 and 16 qubits",
        });
    }
    Ok(())
}

/// Driver Hamiltonian `-sum_s sigma_x^s`.
pub fn build_initial_hamiltonian(num_sites: usize) -> Result<Hamiltonian> {
    check_sites(num_sites)?;
    let k = 1usize << num_sites;
    let rows = (0..k)
        .map(|r| {
            (0..num_sites)
                .map(|s| (r ^ (1 << s), Complex64::new(-1.0, 0.0)))
                .collect()
        })
        .collect();
    let mut h = Hamiltonian::sparse(num_sites, SparseMatrix::from_rows(rows))?;
    h.transverse_field = Some(1.0);
    Ok(h)
}

/// Diagonal problem Hamiltonian from a compiled quadratic model.
pub fn build_final_hamiltonian_quadratic(model: &QuadraticSpinModel) -> Result<Hamiltonian> {
    if model.basis() != Basis::SigmaS {
        return Err(Error::WrongBasis {
            expected: Basis::SigmaS.name(),
            actual: model.basis().name(),
        });
    }
    check_sites(model.num_sites())?;
    let k = 1u64 << model.num_sites();
    let diag = (0..k).map(|idx| model.energy_of_index(idx)).collect();
    Hamiltonian::diagonal(model.num_sites(), diag)
}

/// Diagonal Hamiltonian carrying the full surviving-threat objective plus
/// `C` per same-row pair of engagements.
pub fn build_final_hamiltonian_exact(
    inst: &WtaInstance,
    penalty: &PenaltyConfig,
) -> Result<Hamiltonian> {
    let n_sites = inst.num_sites();
    check_sites(n_sites)?;
    let diag = (0..inst.dimension())
        .map(|k| {
            let a = Assignment::decode(BasisIndex(k), inst.weapons(), inst.targets())
                .expect("index within range");
            inst.objective_of_index(k) + penalty.c * a.double_assignment_pairs() as f64
        })
        .collect();
    Hamiltonian::diagonal(n_sites, diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::compile;

    #[test]
    fn single_qubit_driver() {
        let h = build_initial_hamiltonian(1).unwrap();
        let d = h.to_dense();
        assert_eq!(d[0][0].re, 0.0);
        assert_eq!(d[0][1].re, -1.0);
        assert_eq!(d[1][0].re, -1.0);
        assert_eq!(d[1][1].re, 0.0);
    }

    #[test]
    fn driver_structure() {
        for n in 1..=6 {
            let h = build_initial_hamiltonian(n).unwrap();
            let m = h.as_sparse().unwrap();
            assert_eq!(m.nnz(), n << n);
            for r in 0..h.dim() {
                let row: Vec<_> = m.row(r).collect();
                assert_eq!(row.len(), n);
                for (c, v) in row {
                    assert_eq!((r ^ c).count_ones(), 1);
                    assert_eq!(v, Complex64::new(-1.0, 0.0));
                }
            }
            assert_eq!(h.hermiticity_error(), 0.0);
        }
        assert!(matches!(
            build_initial_hamiltonian(MAX_SITES + 1),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn final_hamiltonians() {
        let inst = WtaInstance::new(vec![1.0, 2.0], vec![vec![0.9, 0.5]]).unwrap();
        let pen = PenaltyConfig::new(10.0).unwrap();
        let model = compile(&inst, &pen);
        let hq = build_final_hamiltonian_quadratic(&model).unwrap();
        assert_eq!(hq.diagonal_entries().unwrap()[0], model.offset());

        let he = build_final_hamiltonian_exact(&inst, &pen).unwrap();
        let d = he.diagonal_entries().unwrap();
        assert_eq!(d[0], 3.0);
        let both = Assignment::from_rows(&[vec![1, 1]]).unwrap();
        let expected = inst.objective(&both).unwrap() + 10.0;
        assert!((d[both.encode().0 as usize] - expected).abs() < 1e-12);

        let z = model.to_ising().unwrap();
        assert!(matches!(
            build_final_hamiltonian_quadratic(&z),
            Err(Error::WrongBasis { .. })
        ));
    }
}
