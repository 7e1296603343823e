//! Low-lying spectrum of the interpolated Hamiltonian.
//!
//! For small registers `H(t)` is diagonalized densely. Larger ones use
//! Lanczos with full reorthogonalization, finding one eigenpair per pass and
//! deflating it before the next, so degenerate levels (the driver alone has
//! binomial multiplicities) come out with their multiplicity.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::operator::Hamiltonian;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumOptions {
    /// Number of lowest eigenvalues per sample, at least 2.
    pub k: usize,
    /// Registers up to this dimension are diagonalized densely.
    pub dense_max_dim: usize,
    /// Relative residual at which a Lanczos eigenpair counts as converged.
    pub tol: f64,
    pub max_krylov: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            k: 8,
            dense_max_dim: 256,
            tol: 1e-8,
            max_krylov: 250,
            max_restarts: 30,
            seed: 0x5eed,
        }
    }
}

impl SpectrumOptions {
    pub fn with_k(k: usize) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    pub times: Vec<f64>,
    /// `eigenvalues[sample]`, ascending.
    pub eigenvalues: Vec<Vec<f64>>,
}

impl SpectrumTrace {
    /// `lambda_1 - lambda_0` per sample.
    pub fn gaps(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|ev| ev[1] - ev[0]).collect()
    }

    /// Smallest gap and the time it occurs.
    pub fn min_gap(&self) -> Option<(f64, f64)> {
        self.gaps()
            .into_iter()
            .zip(&self.times)
            .map(|(g, &t)| (t, g))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// CSV with columns `t`, `lambda_0`, ..., `lambda_{k-1}`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let k = self.eigenvalues.first().map_or(0, Vec::len);
        let mut header = vec!["t".to_string()];
        header.extend((0..k).map(|i| format!("lambda_{i}")));
        w.write_record(&header)?;
        for (t, ev) in self.times.iter().zip(&self.eigenvalues) {
            let mut rec = vec![t.to_string()];
            rec.extend(ev.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Lowest `opts.k` eigenvalues of `(1 - t/T) hb + (t/T) hf` at every sample time.
pub fn spectrum(
    hb: &Hamiltonian,
    hf: &Hamiltonian,
    sample_times: &[f64],
    total_time: f64,
    opts: &SpectrumOptions,
) -> Result<SpectrumTrace> {
    if opts.k < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 eigenvalues to resolve a gap, got k = {}",
            opts.k
        )));
    }
    if hb.num_sites() != hf.num_sites() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} sites", hb.num_sites()),
            actual: format!("{} sites", hf.num_sites()),
        });
    }
    if !(total_time > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "annealing time must be positive, got {total_time}"
        )));
    }
    let dim = hb.dim();
    let k = opts.k.min(dim);
    let real = hb.is_real() && hf.is_real();
    if !real && dim > opts.dense_max_dim.max(1024) {
        return Err(Error::InvalidConfig(
            "complex Hamiltonians are only supported by the dense eigensolver".into(),
        ));
    }

    let mut eigenvalues = Vec::with_capacity(sample_times.len());
    let mut previous: Vec<Vec<f64>> = Vec::new();
    for &t in sample_times {
        let a = 1.0 - t / total_time;
        let b = t / total_time;
        let ev = if dim <= opts.dense_max_dim || !real {
            dense_lowest(hb, hf, a, b, k)
        } else {
            let apply = |x: &[f64], out: &mut [f64]| {
                out.fill(0.0);
                hb.apply_add_real(a, x, out);
                hf.apply_add_real(b, x, out);
            };
            let (vals, vecs) = lanczos_lowest(apply, dim, k, &previous, opts)
                .map_err(|reason| Error::EigenNoConvergence { time: t, reason })?;
            previous = vecs;
            vals
        };
        eigenvalues.push(ev);
    }
    Ok(SpectrumTrace {
        times: sample_times.to_vec(),
        eigenvalues,
    })
}

fn dense_lowest(hb: &Hamiltonian, hf: &Hamiltonian, a: f64, b: f64, k: usize) -> Vec<f64> {
    let dim = hb.dim();
    let mut vals = if hb.is_real() && hf.is_real() {
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        for (r, row) in hb.to_dense().iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                m[(r, c)] = a * v.re;
            }
        }
        for (r, row) in hf.to_dense().iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                m[(r, c)] += b * v.re;
            }
        }
        SymmetricEigen::new(m).eigenvalues.as_slice().to_vec()
    } else {
        let mut m = DMatrix::<num_complex::Complex64>::zeros(dim, dim);
        let (db, df) = (hb.to_dense(), hf.to_dense());
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] = db[r][c] * a + df[r][c] * b;
            }
        }
        SymmetricEigen::new(m).eigenvalues.as_slice().to_vec()
    };
    vals.sort_by(f64::total_cmp);
    vals.truncate(k);
    vals
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

fn orthogonalize_once(w: &mut [f64], basis: &[Vec<f64>]) {
    for v in basis {
        let c = dot(w, v);
        for (wi, vi) in w.iter_mut().zip(v) {
            *wi -= c * vi;
        }
    }
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    orthogonalize_once(w, basis);
    orthogonalize_once(w, basis);
}

/// Eigenvalues of the symmetric tridiagonal matrix, ascending, with the
/// matching eigenvectors as columns.
fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Lowest `k` eigenvalues of a real symmetric operator, with multiplicity.
///
/// `guess` (eigenvectors of a nearby operator, possibly empty) seeds the
/// start vectors. The returned vectors are orthonormal.
pub(crate) fn lanczos_lowest<F>(
    apply: F,
    dim: usize,
    k: usize,
    guess: &[Vec<f64>],
    opts: &SpectrumOptions,
) -> std::result::Result<(Vec<f64>, Vec<Vec<f64>>), String>
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut locked: Vec<Vec<f64>> = Vec::new();
    let mut values: Vec<f64> = Vec::new();

    while values.len() < k && locked.len() < dim {
        let pairs = lowest_of_complement(&apply, &mut rng, guess, &locked, dim, k - values.len(), opts)
            .ok_or_else(|| {
                format!(
                    "eigenvalue {} not converged after {} restarts",
                    values.len(),
                    opts.max_restarts
                )
            })?;
        for (theta, v) in pairs {
            values.push(theta);
            locked.push(v);
        }
    }

    // Repeated levels appear once per Krylov space and a level inside a tight
    // cluster can be passed over. A fresh search on the complement must not
    // land below the k-th value; if it does, keep what it found and look again.
    for _ in 0..2 * k {
        if locked.len() >= dim {
            break;
        }
        values.sort_by(f64::total_cmp);
        let top = values[k - 1];
        let Some(pairs) = lowest_of_complement(&apply, &mut rng, &[], &locked, dim, 1, opts) else {
            break;
        };
        let (theta, v) = pairs.into_iter().next().expect("one pair requested");
        if theta >= top - 1e3 * opts.tol * top.abs().max(1.0) {
            break;
        }
        values.push(theta);
        locked.push(v);
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order.truncate(k);
    Ok((
        order.iter().map(|&i| values[i]).collect(),
        order.iter().map(|&i| locked[i].clone()).collect(),
    ))
}

/// Up to `need` converged lowest eigenpairs orthogonal to `locked`. Restarts
/// from the lowest Ritz vector until at least one pair meets the tolerance.
fn lowest_of_complement<F>(
    apply: &F,
    rng: &mut ChaCha8Rng,
    guess: &[Vec<f64>],
    locked: &[Vec<f64>],
    dim: usize,
    need: usize,
    opts: &SpectrumOptions,
) -> Option<Vec<(f64, Vec<f64>)>>
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut start: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    if !guess.is_empty() {
        // mostly the old eigenvectors, a little noise so nothing is missed
        let scale = 1e-3 / (dim as f64).sqrt();
        start.iter_mut().for_each(|x| *x *= scale);
        for g in guess {
            let c = rng.gen_range(0.5..1.0);
            for (x, gi) in start.iter_mut().zip(g) {
                *x += c * gi;
            }
        }
    }
    for _ in 0..=opts.max_restarts {
        orthogonalize(&mut start, locked);
        let len = norm(&start);
        if len == 0.0 {
            return None;
        }
        start.iter_mut().for_each(|x| *x /= len);

        match lanczos_pass(apply, &start, locked, dim, need, opts) {
            Ok(mut pairs) => {
                // lock one at a time so later vectors stay orthogonal to earlier ones
                let mut basis = locked.to_vec();
                for (_, v) in pairs.iter_mut() {
                    orthogonalize(v, &basis);
                    let len = norm(v);
                    v.iter_mut().for_each(|x| *x /= len);
                    basis.push(v.clone());
                }
                return Some(pairs);
            }
            Err(ritz) => start = ritz,
        }
    }
    None
}

/// One Lanczos run on the complement of `locked`. On success returns the
/// longest prefix (at most `need`) of the lowest Ritz pairs that all meet the
/// tolerance, otherwise the lowest Ritz vector to restart from.
fn lanczos_pass<F>(
    apply: &F,
    start: &[f64],
    locked: &[Vec<f64>],
    dim: usize,
    need: usize,
    opts: &SpectrumOptions,
) -> std::result::Result<Vec<(f64, Vec<f64>)>, Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]),
{
    let max_m = opts.max_krylov.min(dim - locked.len()).max(1);
    let mut basis: Vec<Vec<f64>> = vec![start.to_vec()];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];

    loop {
        let j = basis.len() - 1;
        apply(&basis[j], &mut w);
        let a = dot(&w, &basis[j]);
        alpha.push(a);
        let before = norm(&w);
        orthogonalize_once(&mut w, locked);
        orthogonalize_once(&mut w, &basis);
        if norm(&w) < 0.7 * before {
            // heavy cancellation, one more sweep
            orthogonalize_once(&mut w, &basis);
        }
        // the basis carries rounding-level locked components; projecting
        // them out again keeps them from compounding step after step
        orthogonalize_once(&mut w, locked);
        let b = norm(&w);
        // what survives orthogonalization at this level is rounding noise;
        // normalizing it would inject spurious directions
        let exhausted = b <= 1e-9 * before;
        let full = basis.len() >= max_m;
        let m = basis.len();
        let check = exhausted || full || (m >= need.max(4) && m % 10 == 0);
        if check {
            let (thetas, ys) = tridiagonal_eigen(&alpha, &beta);
            let mut accepted = 0;
            for c in 0..thetas.len().min(need) {
                let residual = if exhausted { 0.0 } else { b * ys[(m - 1, c)].abs() };
                if residual <= opts.tol * thetas[c].abs().max(1.0) {
                    accepted += 1;
                } else {
                    break;
                }
            }
            let want = need.min(m);
            if accepted == want || ((exhausted || full) && accepted > 0) {
                return Ok((0..accepted)
                    .map(|c| (thetas[c], combine(&basis, ys.column(c).iter())))
                    .collect());
            }
            if exhausted || full {
                return Err(combine(&basis, ys.column(0).iter()));
            }
        }
        beta.push(b);
        let next: Vec<f64> = w.iter().map(|x| x / b).collect();
        basis.push(next);
    }
}

fn combine<'a>(basis: &[Vec<f64>], coeffs: impl Iterator<Item = &'a f64>) -> Vec<f64> {
    let mut out = vec![0.0; basis[0].len()];
    for (v, &c) in basis.iter().zip(coeffs) {
        for (r, x) in out.iter_mut().zip(v) {
            *r += c * x;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::operator::build_initial_hamiltonian;

    fn binomial_levels(n: usize, k: usize) -> Vec<f64> {
        // eigenvalues of -sum sigma_x are -n + 2w with multiplicity C(n, w)
        let mut out = Vec::new();
        let mut c = 1usize;
        for w in 0..=n {
            for _ in 0..c {
                out.push(-(n as f64) + 2.0 * w as f64);
            }
            c = c * (n - w) / (w + 1);
        }
        out.truncate(k);
        out
    }

    #[test]
    fn degenerate_driver_levels_via_lanczos() {
        let n = 9;
        let hb = build_initial_hamiltonian(n).unwrap();
        let zero = Hamiltonian::diagonal(n, vec![0.0; 1 << n]).unwrap();
        let opts = SpectrumOptions {
            k: 12,
            dense_max_dim: 0,
            ..SpectrumOptions::default()
        };
        let tr = spectrum(&hb, &zero, &[0.0], 1.0, &opts).unwrap();
        let expected = binomial_levels(n, 12);
        for (got, want) in tr.eigenvalues[0].iter().zip(&expected) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn rejects_single_level_request() {
        let hb = build_initial_hamiltonian(2).unwrap();
        let hf = Hamiltonian::diagonal(2, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            spectrum(&hb, &hf, &[0.0], 1.0, &SpectrumOptions::with_k(1)),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn endpoints() {
        let n = 4;
        let hb = build_initial_hamiltonian(n).unwrap();
        let diag: Vec<f64> = (0..16).map(|k| ((k * 7) % 11) as f64 - 3.0).collect();
        let hf = Hamiltonian::diagonal(n, diag.clone()).unwrap();
        let tr = spectrum(&hb, &hf, &[0.0, 2.0], 2.0, &SpectrumOptions::with_k(3)).unwrap();
        assert!((tr.eigenvalues[0][0] + 4.0).abs() < 1e-10);
        let lo = diag.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((tr.eigenvalues[1][0] - lo).abs() < 1e-10);
        assert!(tr.eigenvalues.iter().all(|ev| ev.windows(2).all(|w| w[0] <= w[1])));
    }

    #[test]
    fn lanczos_matches_dense_along_the_path() {
        use crate::instance::{GeneratorConfig, WtaInstance};
        use crate::ising::{compile, PenaltyConfig};
        use crate::sim::operator::build_final_hamiltonian_quadratic;
        // large penalty spread and near-degenerate levels once deflation kicks in
        let inst = WtaInstance::generate(4, 2, 1, &GeneratorConfig::default()).unwrap();
        let hf = build_final_hamiltonian_quadratic(&compile(&inst, &PenaltyConfig::default_for(&inst)))
            .unwrap();
        let hb = build_initial_hamiltonian(8).unwrap();
        let times = [0.0, 0.3, 0.5, 0.7, 1.0];
        let dense = spectrum(&hb, &hf, &times, 1.0, &SpectrumOptions::with_k(6)).unwrap();
        let opts = SpectrumOptions {
            dense_max_dim: 0,
            ..SpectrumOptions::with_k(6)
        };
        let sparse = spectrum(&hb, &hf, &times, 1.0, &opts).unwrap();
        for (d, s) in dense.eigenvalues.iter().zip(&sparse.eigenvalues) {
            for (a, b) in d.iter().zip(s) {
                assert!((a - b).abs() < 1e-8, "{d:?} vs {s:?}");
            }
        }
    }
}
