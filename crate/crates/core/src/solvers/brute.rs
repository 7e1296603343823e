use crate::error::{Error, Result};
use crate::instance::{site_index, Assignment, BasisIndex, WtaInstance};
use crate::ising::{Basis, QuadraticSpinModel};

/// Largest register enumerated exhaustively.
pub const ENUMERATION_CEILING: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct WtaSolution {
    pub assignment: Assignment,
    pub index: BasisIndex,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsingSolution {
    /// Occupation bits in site order.
    pub bits: Vec<u8>,
    pub index: BasisIndex,
    pub energy: f64,
}

fn check_ceiling(num_sites: usize) -> Result<()> {
    if num_sites > ENUMERATION_CEILING {
        return Err(Error::TooLarge {
            num_sites,
            ceiling: ENUMERATION_CEILING,
            hint: "use the cross-entropy solver instead",
        });
    }
    Ok(())
}

/// Exact optimum over all feasible decision matrices; ties go to the lowest index.
pub fn brute_force_wta(inst: &WtaInstance) -> Result<WtaSolution> {
    let (m, n) = (inst.weapons(), inst.targets());
    check_ceiling(m * n)?;
    let row_masks: Vec<u64> = (0..m)
        .map(|i| (0..n).fold(0u64, |acc, j| acc | 1 << site_index(m, i, j)))
        .collect();
    let mut best = (f64::INFINITY, 0u64);
    for k in 0..inst.dimension() {
        if row_masks.iter().any(|&mask| (k & mask).count_ones() > 1) {
            continue;
        }
        let t = inst.objective_of_index(k);
        if t < best.0 {
            best = (t, k);
        }
    }
    let index = BasisIndex(best.1);
    Ok(WtaSolution {
        assignment: Assignment::decode(index, m, n)?,
        index,
        objective: best.0,
    })
}

/// Exhaustive ground state of a `SigmaS` model; ties go to the lowest index.
pub fn brute_force_ising(model: &QuadraticSpinModel) -> Result<IsingSolution> {
    if model.basis() != Basis::SigmaS {
        return Err(Error::WrongBasis {
            expected: Basis::SigmaS.name(),
            actual: model.basis().name(),
        });
    }
    let num_sites = model.num_sites();
    check_ceiling(num_sites)?;
    let mut linear = vec![0.0; num_sites];
    for (&s, &h) in model.linear() {
        linear[s] = h;
    }
    let pairs: Vec<(usize, usize, f64)> = model
        .quadratic()
        .iter()
        .map(|(&(a, b), &j)| (a, b, j))
        .collect();

    let mut best = (f64::INFINITY, 0u64);
    for k in 0..1u64 << num_sites {
        let mut e = model.offset();
        let mut rest = k;
        while rest != 0 {
            let s = rest.trailing_zeros() as usize;
            e += linear[s];
            rest &= rest - 1;
        }
        for &(a, b, j) in &pairs {
            if k >> a & k >> b & 1 == 1 {
                e += j;
            }
        }
        if e < best.0 {
            best = (e, k);
        }
    }
    let index = BasisIndex(best.1);
    Ok(IsingSolution {
        bits: index.bits(num_sites),
        index,
        energy: best.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{compile, PenaltyConfig};

    #[test]
    fn single_cell() {
        let inst = WtaInstance::new(vec![1.0], vec![vec![0.8]]).unwrap();
        let sol = brute_force_wta(&inst).unwrap();
        assert_eq!(sol.assignment.rows(), vec![vec![1]]);
        assert!((sol.objective - 0.2).abs() < 1e-15);
    }

    #[test]
    fn useless_weapons_stay_idle() {
        let inst = WtaInstance::new(vec![1.0, 0.5], vec![vec![0.0, 0.0]; 3]).unwrap();
        let sol = brute_force_wta(&inst).unwrap();
        assert_eq!(sol.index, BasisIndex(0));
        assert_eq!(sol.objective, 1.5);
    }

    #[test]
    fn row_example() {
        let inst = WtaInstance::new(vec![1.0, 2.0], vec![vec![0.9, 0.5]]).unwrap();
        let sol = brute_force_wta(&inst).unwrap();
        assert_eq!(sol.assignment.rows(), vec![vec![0, 1]]);
        assert!((sol.objective - 2.0).abs() < 1e-12);

        let model = compile(&inst, &PenaltyConfig::new(10.0).unwrap());
        let ground = brute_force_ising(&model).unwrap();
        assert_eq!(ground.bits, vec![0, 1]);
        assert!((ground.energy - 2.0).abs() < 1e-12);
    }

    #[test]
    fn offset_only_model() {
        let mut model = QuadraticSpinModel::new(5, Basis::SigmaS);
        model.add_offset(-2.5);
        let ground = brute_force_ising(&model).unwrap();
        assert_eq!(ground.index, BasisIndex(0));
        assert_eq!(ground.energy, -2.5);
    }

    #[test]
    fn ceilings() {
        let inst = WtaInstance::new(vec![1.0; 5], vec![vec![0.5; 5]; 5]).unwrap();
        assert!(matches!(brute_force_wta(&inst), Err(Error::TooLarge { .. })));
        let model = QuadraticSpinModel::new(25, Basis::SigmaS);
        assert!(matches!(brute_force_ising(&model), Err(Error::TooLarge { .. })));
        let z = QuadraticSpinModel::new(2, Basis::SigmaZ);
        assert!(matches!(brute_force_ising(&z), Err(Error::WrongBasis { .. })));
    }
}
