//! Integration of `i d/dt psi = H(t) psi` along the linear annealing path
//! `H(t) = (1 - t/T) H_B + (t/T) H_F`, with `hbar = 1`.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::instance::BasisIndex;

use super::operator::Hamiltonian;
use super::state::{argmin_lowest, StateVector};

/// Annealing duration, step count and reporting times.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    total_time: f64,
    num_steps: usize,
    sample_times: Vec<f64>,
}

impl Schedule {
    pub fn new(total_time: f64, num_steps: usize, sample_times: Vec<f64>) -> Result<Self> {
        if !(total_time.is_finite() && total_time > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "annealing time must be positive, got {total_time}"
            )));
        }
        if num_steps == 0 {
            return Err(Error::InvalidConfig("need at least one step".into()));
        }
        if sample_times.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidConfig("sample times must be sorted".into()));
        }
        if let Some(bad) = sample_times
            .iter()
            .find(|&&t| !(0.0..=total_time).contains(&t))
        {
            return Err(Error::InvalidConfig(format!(
                "sample time {bad} outside [0, {total_time}]"
            )));
        }
        Ok(Self {
            total_time,
            num_steps,
            sample_times,
        })
    }

    /// `count` evenly spaced samples including both end points.
    pub fn uniform(total_time: f64, num_steps: usize, count: usize) -> Result<Self> {
        Self::new(total_time, num_steps, uniform_times(total_time, count))
    }

    /// Uniform samples with the default step count for problem Hamiltonian `hf`.
    pub fn with_default_steps(total_time: f64, hf: &Hamiltonian, count: usize) -> Result<Self> {
        Self::uniform(total_time, default_num_steps(total_time, hf), count)
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    pub fn step(&self) -> f64 {
        self.total_time / self.num_steps as f64
    }

    pub fn sample_times(&self) -> &[f64] {
        &self.sample_times
    }

    /// Same times, twice as many steps.
    pub fn refined(&self) -> Self {
        Self {
            num_steps: self.num_steps * 2,
            ..self.clone()
        }
    }
}

pub fn uniform_times(total_time: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![total_time],
        _ => (0..count)
            .map(|i| total_time * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Largest energy change caused by flipping one qubit of a diagonal
/// Hamiltonian, the row-sum bound for any other operator.
pub fn local_energy_scale(h: &Hamiltonian) -> f64 {
    match h.diagonal_entries() {
        Some(d) => {
            let mut worst: f64 = 0.0;
            for (k, &e) in d.iter().enumerate() {
                for s in 0..h.num_sites() {
                    let other = k ^ (1 << s);
                    if other > k {
                        worst = worst.max((d[other] - e).abs());
                    }
                }
            }
            worst
        }
        None => h.norm_bound(),
    }
}

/// Product of step length and local energy scale used by [`default_num_steps`].
pub const DEFAULT_STEP_SCALE: f64 = 0.5;

/// At least 1000 steps, and at most `0.5 / max(L, N)` per step where `L` is
/// the [`local_energy_scale`] of `hf`. Tuned for [`Integrator::Split4`].
pub fn default_num_steps(total_time: f64, hf: &Hamiltonian) -> usize {
    let scale = local_energy_scale(hf).max(hf.num_sites() as f64);
    let steps = (total_time * scale / DEFAULT_STEP_SCALE).ceil();
    steps.max(1000.0) as usize
}

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    /// Fourth-order composition (triple jump) of symmetric splitting steps.
    /// Each sub-flow is exact: the diagonal part is a phase, the transverse
    /// field a product of single-qubit rotations. Requires a diagonal problem
    /// Hamiltonian and a transverse-field driver.
    #[default]
    Split4,
    /// Classical explicit Runge-Kutta of order four on arbitrary operators.
    Rk4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    pub integrator: Integrator,
    /// Largest allowed `|<psi|psi> - 1|` at any checkpoint.
    pub norm_tol: f64,
    /// Keep only the `M` most populated final states plus the ground state.
    /// `None` keeps every basis state.
    pub trace_top: Option<usize>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            integrator: Integrator::default(),
            norm_tol: 1e-6,
            trace_top: Some(32),
        }
    }
}

/// Populations sampled along an evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    /// Basis states whose populations are kept, ascending.
    pub indices: Vec<BasisIndex>,
    /// `populations[sample][column]` for the listed `indices`.
    pub populations: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
    /// Largest `|norm^2 - 1|` seen at any checkpoint.
    pub max_norm_drift: f64,
    /// Lowest-energy basis state of the problem Hamiltonian.
    pub ground_state: BasisIndex,
}

impl EvolutionTrace {
    /// Population of `k` in every sample, if stored.
    pub fn column(&self, k: BasisIndex) -> Option<Vec<f64>> {
        let c = self.indices.binary_search(&k).ok()?;
        Some(self.populations.iter().map(|row| row[c]).collect())
    }

    /// Restrict to the `top` largest states at the final sample plus `keep`.
    pub fn truncated(&self, top: usize, keep: &[BasisIndex]) -> Self {
        let Some(last) = self.populations.last() else {
            return self.clone();
        };
        let mut order: Vec<usize> = (0..self.indices.len()).collect();
        order.sort_by(|&a, &b| last[b].total_cmp(&last[a]).then(a.cmp(&b)));
        let mut cols: Vec<usize> = order.into_iter().take(top).collect();
        for k in keep {
            if let Ok(c) = self.indices.binary_search(k) {
                cols.push(c);
            }
        }
        cols.sort_unstable();
        cols.dedup();
        Self {
            times: self.times.clone(),
            indices: cols.iter().map(|&c| self.indices[c]).collect(),
            populations: self
                .populations
                .iter()
                .map(|row| cols.iter().map(|&c| row[c]).collect())
                .collect(),
            norms: self.norms.clone(),
            max_norm_drift: self.max_norm_drift,
            ground_state: self.ground_state,
        }
    }

    /// CSV with columns `t`, `norm`, then `p_<k>` per stored basis index.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string(), "norm".to_string()];
        header.extend(self.indices.iter().map(|k| format!("p_{}", k.0)));
        w.write_record(&header)?;
        for (s, row) in self.populations.iter().enumerate() {
            let mut rec = vec![self.times[s].to_string(), self.norms[s].to_string()];
            rec.extend(row.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Path<'a> {
    hb: &'a Hamiltonian,
    hf: Hamiltonian,
    total_time: f64,
    // subtracted from the problem diagonal; restored as a global phase
    shift: f64,
}

impl Path<'_> {
    fn driver_weight(&self, t: f64) -> f64 {
        1.0 - t / self.total_time
    }

    fn problem_weight(&self, t: f64) -> f64 {
        t / self.total_time
    }

    /// `out = -i H(t) psi`.
    fn rhs(&self, t: f64, psi: &[Complex64], out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
        self.hb.apply_add(self.driver_weight(t), psi, out);
        self.hf.apply_add(self.problem_weight(t), psi, out);
        for o in out.iter_mut() {
            *o = Complex64::new(o.im, -o.re);
        }
    }

    /// Phase accumulated by the removed shift between 0 and `t`.
    fn shift_phase(&self, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, -self.shift * t * t / (2.0 * self.total_time))
    }
}

struct Rk4 {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4 {
    fn new(dim: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); dim];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    fn step(&mut self, path: &Path<'_>, t: f64, h: f64, psi: &mut [Complex64]) {
        path.rhs(t, psi, &mut self.k1);
        for ((x, &p), &k) in self.tmp.iter_mut().zip(psi.iter()).zip(&self.k1) {
            *x = p + k * (h / 2.0);
        }
        path.rhs(t + h / 2.0, &self.tmp, &mut self.k2);
        for ((x, &p), &k) in self.tmp.iter_mut().zip(psi.iter()).zip(&self.k2) {
            *x = p + k * (h / 2.0);
        }
        path.rhs(t + h / 2.0, &self.tmp, &mut self.k3);
        for ((x, &p), &k) in self.tmp.iter_mut().zip(psi.iter()).zip(&self.k3) {
            *x = p + k * h;
        }
        path.rhs(t + h, &self.tmp, &mut self.k4);
        for (i, p) in psi.iter_mut().enumerate() {
            *p += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * (h / 6.0);
        }
    }
}

// triple-jump weights
const YOSHIDA_OUTER: f64 = 1.351_207_191_959_657_8;
const YOSHIDA_INNER: f64 = -1.702_414_383_919_315_3;

struct Split4<'a> {
    diag: &'a [f64],
    field: f64,
    num_sites: usize,
    grid: Option<PhaseGrid>,
}

/// Phase factors of the four diagonal sub-flows of a grid step. Each is
/// `exp(-i E (A + B j))` for step `j`, advanced by one multiplication per step.
struct PhaseGrid {
    h: f64,
    next_step: usize,
    offsets: [f64; 5],
    factors: [Vec<Complex64>; 4],
    growth: [Vec<Complex64>; 4],
}

const PHASE_RESYNC: usize = 1024;

impl PhaseGrid {
    fn offsets(h: f64) -> [f64; 5] {
        let outer = YOSHIDA_OUTER * h;
        let inner = YOSHIDA_INNER * h;
        [0.0, outer / 2.0, outer + inner / 2.0, h - outer / 2.0, h]
    }

    fn new(diag: &[f64], total_time: f64, h: f64) -> Self {
        let offsets = Self::offsets(h);
        let growth = std::array::from_fn(|q| {
            let (lo, hi) = (offsets[q], offsets[q + 1]);
            let rate = (hi - lo) * h / total_time;
            diag.iter()
                .map(|&e| Complex64::from_polar(1.0, -e * rate))
                .collect()
        });
        let mut grid = Self {
            h,
            next_step: 0,
            offsets,
            factors: std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); diag.len()]),
            growth,
        };
        grid.resync(diag, total_time, 0);
        grid
    }

    fn resync(&mut self, diag: &[f64], total_time: f64, step: usize) {
        let t = step as f64 * self.h;
        for q in 0..4 {
            let (lo, hi) = (t + self.offsets[q], t + self.offsets[q + 1]);
            let weight = (hi * hi - lo * lo) / (2.0 * total_time);
            for (f, &e) in self.factors[q].iter_mut().zip(diag) {
                *f = Complex64::from_polar(1.0, -e * weight);
            }
        }
        self.next_step = step;
    }
}

impl Split4<'_> {
    /// Exact diagonal flow from `t0` to `t1` (time runs along).
    fn phase(&self, path: &Path<'_>, t0: f64, t1: f64, psi: &mut [Complex64]) {
        let weight = (t1 * t1 - t0 * t0) / (2.0 * path.total_time);
        for (c, &e) in psi.iter_mut().zip(self.diag) {
            *c *= Complex64::from_polar(1.0, -e * weight);
        }
    }

    /// `exp(-i h a(t) H_B)` for `H_B = -g sum sigma_x`.
    fn rotate(&self, path: &Path<'_>, t: f64, h: f64, psi: &mut [Complex64]) {
        let theta = h * path.driver_weight(t) * self.field;
        let (s, c) = theta.sin_cos();
        for site in 0..self.num_sites {
            let half = 1usize << site;
            for block in psi.chunks_exact_mut(2 * half) {
                let (lo, hi) = block.split_at_mut(half);
                for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = Complex64::new(c * x.re - s * y.im, c * x.im + s * y.re);
                    *b = Complex64::new(c * y.re - s * x.im, c * y.im + s * x.re);
                }
            }
        }
    }

    /// One step of arbitrary length starting at `t`.
    fn step(&self, path: &Path<'_>, t: f64, h: f64, psi: &mut [Complex64]) {
        let mut now = t;
        let mut pending = now;
        for w in [YOSHIDA_OUTER, YOSHIDA_INNER, YOSHIDA_OUTER] {
            let sub = w * h;
            let mid = now + sub / 2.0;
            self.phase(path, pending, mid, psi);
            self.rotate(path, mid, sub, psi);
            now += sub;
            pending = mid;
        }
        self.phase(path, pending, t + h, psi);
    }

    /// Step `j` of the uniform grid with spacing `h`, using cached phases.
    fn grid_step(&mut self, path: &Path<'_>, j: usize, h: f64, psi: &mut [Complex64]) {
        let mut grid = match self.grid.take() {
            Some(g) if g.h == h => g,
            _ => PhaseGrid::new(self.diag, path.total_time, h),
        };
        if grid.next_step != j || j % PHASE_RESYNC == 0 {
            grid.resync(self.diag, path.total_time, j);
        }
        let t = j as f64 * h;
        let subs = [YOSHIDA_OUTER * h, YOSHIDA_INNER * h, YOSHIDA_OUTER * h];
        for q in 0..4 {
            for (c, f) in psi.iter_mut().zip(&grid.factors[q]) {
                *c *= f;
            }
            if q < 3 {
                self.rotate(path, t + grid.offsets[q + 1], subs[q], psi);
            }
        }
        for (fs, gs) in grid.factors.iter_mut().zip(&grid.growth) {
            for (f, g) in fs.iter_mut().zip(gs) {
                *f *= g;
            }
        }
        grid.next_step = j + 1;
        self.grid = Some(grid);
    }
}

enum Stepper<'a> {
    Split(Split4<'a>),
    Rk4(Rk4),
}

impl Stepper<'_> {
    fn partial(&mut self, path: &Path<'_>, t: f64, h: f64, psi: &mut [Complex64]) {
        if h == 0.0 {
            return;
        }
        match self {
            Stepper::Split(s) => s.step(path, t, h, psi),
            Stepper::Rk4(r) => r.step(path, t, h, psi),
        }
    }

    fn grid(&mut self, path: &Path<'_>, j: usize, h: f64, psi: &mut [Complex64]) {
        match self {
            Stepper::Split(s) => s.grid_step(path, j, h, psi),
            Stepper::Rk4(r) => r.step(path, j as f64 * h, h, psi),
        }
    }
}

/// Anneals from the driver ground state and records populations at the
/// schedule's sample times.
pub fn evolve(
    hb: &Hamiltonian,
    hf: &Hamiltonian,
    schedule: &Schedule,
    opts: &EvolveOptions,
) -> Result<(StateVector, EvolutionTrace)> {
    if hb.num_sites() != hf.num_sites() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} sites", hb.num_sites()),
            actual: format!("{} sites", hf.num_sites()),
        });
    }
    let num_sites = hb.num_sites();
    let ground_state = hf
        .diagonal_entries()
        .map_or(BasisIndex(0), argmin_lowest);

    let (hf_shifted, shift) = match hf.diagonal_entries() {
        Some(d) => {
            let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
            let shifted = d.iter().map(|&e| e - lo).collect();
            (Hamiltonian::diagonal(num_sites, shifted)?, lo)
        }
        None => (hf.clone(), 0.0),
    };
    let path = Path {
        hb,
        hf: hf_shifted,
        total_time: schedule.total_time(),
        shift,
    };

    let mut stepper = match opts.integrator {
        Integrator::Split4 => {
            let field = hb.transverse_field_strength().ok_or_else(|| {
                Error::InvalidConfig("splitting integrator needs a transverse-field driver".into())
            })?;
            let diag = path.hf.diagonal_entries().ok_or_else(|| {
                Error::InvalidConfig(
                    "splitting integrator needs a diagonal problem Hamiltonian".into(),
                )
            })?;
            Stepper::Split(Split4 {
                diag,
                field,
                num_sites,
                grid: None,
            })
        }
        Integrator::Rk4 => Stepper::Rk4(Rk4::new(hb.dim())),
    };

    let mut state = StateVector::uniform(num_sites)?;
    let h = schedule.step();
    let total = schedule.total_time();
    let steps = schedule.num_steps();

    let mut times = Vec::new();
    let mut populations = Vec::new();
    let mut norms = Vec::new();
    let mut max_drift: f64 = 0.0;

    let check = |state: &StateVector, t: f64, max_drift: &mut f64| -> Result<f64> {
        let norm = state.norm_sqr();
        let drift = (norm - 1.0).abs();
        *max_drift = max_drift.max(drift);
        if !(drift <= opts.norm_tol) {
            return Err(Error::NormDrift {
                drift,
                tol: opts.norm_tol,
                time: t,
            });
        }
        Ok(norm)
    };

    let mut samples = schedule.sample_times().iter().copied().peekable();
    for j in 0..=steps {
        let t = j as f64 * h;
        let step_end = if j < steps { (j + 1) as f64 * h } else { f64::INFINITY };
        // samples falling inside this step are reached on a copy
        while let Some(&ts) = samples.peek() {
            if ts >= step_end && j < steps {
                break;
            }
            let mut probe = state.clone();
            stepper.partial(&path, t, ts - t, probe.amplitudes_mut());
            let norm = check(&probe, ts, &mut max_drift)?;
            times.push(ts);
            norms.push(norm);
            let phase = path.shift_phase(ts);
            probe.amplitudes_mut().iter_mut().for_each(|c| *c *= phase);
            populations.push(probe.probabilities());
            samples.next();
        }
        if j == steps {
            break;
        }
        stepper.grid(&path, j, h, state.amplitudes_mut());
        if (j + 1) % 256 == 0 {
            check(&state, step_end, &mut max_drift)?;
        }
    }
    // the grid may end a rounding error away from the nominal duration
    let end = steps as f64 * h;
    if end != total {
        stepper.partial(&path, end, total - end, state.amplitudes_mut());
    }
    check(&state, total, &mut max_drift)?;

    let phase = path.shift_phase(total);
    for c in state.amplitudes_mut() {
        *c *= phase;
    }

    let dim = state.dim() as u64;
    let mut trace = EvolutionTrace {
        times,
        indices: (0..dim).map(BasisIndex).collect(),
        populations,
        norms,
        max_norm_drift: max_drift,
        ground_state,
    };
    if let Some(top) = opts.trace_top {
        trace = trace.truncated(top, &[ground_state]);
    }
    Ok((state, trace))
}
