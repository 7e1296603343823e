use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::instance::BasisIndex;

use super::operator::MAX_SITES;

/// Amplitudes over the computational basis, ordered by [`BasisIndex`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_sites: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(num_sites: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << num_sites {
            return Err(Error::DimensionMismatch {
                expected: format!("{} amplitudes", 1usize << num_sites),
                actual: format!("{}", amps.len()),
            });
        }
        Ok(Self { num_sites, amps })
    }

    /// Uniform superposition `2^{-N/2} sum_k |k>`, the ground state of the driver.
    pub fn uniform(num_sites: usize) -> Result<Self> {
        if num_sites == 0 || num_sites > MAX_SITES {
            return Err(Error::TooLarge {
                num_sites,
                ceiling: MAX_SITES,
                hint: "registers must have between 1 and 16 qubits",
            });
        }
        let k = 1usize << num_sites;
        let a = Complex64::new(1.0 / (k as f64).sqrt(), 0.0);
        Ok(Self {
            num_sites,
            amps: vec![a; k],
        })
    }

    pub fn basis_state(num_sites: usize, k: BasisIndex) -> Result<Self> {
        let dim = 1u64 << num_sites;
        if k.0 >= dim {
            return Err(Error::IndexOutOfRange {
                index: k.0,
                num_sites,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim as usize];
        amps[k.0 as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { num_sites, amps })
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    /// `sum_k |c_k|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Measurement probabilities `|c_k|^2`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Most probable basis state; the lowest index wins ties.
    pub fn argmax(&self) -> BasisIndex {
        argmax_lowest(&self.probabilities())
    }
}

pub fn initial_state(num_sites: usize) -> Result<StateVector> {
    StateVector::uniform(num_sites)
}

pub fn measure_distribution(state: &StateVector) -> Vec<f64> {
    state.probabilities()
}

pub fn argmax_state(state: &StateVector) -> BasisIndex {
    state.argmax()
}

pub(crate) fn argmax_lowest(values: &[f64]) -> BasisIndex {
    let mut best = 0;
    for (k, &p) in values.iter().enumerate() {
        if p > values[best] {
            best = k;
        }
    }
    BasisIndex(best as u64)
}

pub(crate) fn argmin_lowest(values: &[f64]) -> BasisIndex {
    let mut best = 0;
    for (k, &p) in values.iter().enumerate() {
        if p < values[best] {
            best = k;
        }
    }
    BasisIndex(best as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_state() {
        let s = StateVector::uniform(1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0].re - h).abs() < 1e-15);
        assert!((s.amplitudes()[1].re - h).abs() < 1e-15);
        let s = StateVector::uniform(10).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(s
            .probabilities()
            .iter()
            .all(|&p| (p - 1.0 / 1024.0).abs() < 1e-15));
        assert_eq!(s.argmax(), BasisIndex(0));
    }

    #[test]
    fn argmax_rules() {
        let s = StateVector::basis_state(3, BasisIndex(5)).unwrap();
        assert_eq!(argmax_state(&s), BasisIndex(5));
        assert_eq!(measure_distribution(&s)[5], 1.0);

        let mut amps = vec![Complex64::new(0.0, 0.0); 8];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        amps[2] = Complex64::new(h, 0.0);
        amps[7] = Complex64::new(0.0, -h);
        let tie = StateVector::from_amplitudes(3, amps).unwrap();
        assert_eq!(tie.argmax(), BasisIndex(2));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(StateVector::uniform(0).is_err());
        assert!(StateVector::basis_state(2, BasisIndex(4)).is_err());
        assert!(StateVector::from_amplitudes(2, vec![Complex64::new(1.0, 0.0); 3]).is_err());
    }
}
