use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fock::FockBasis;

use super::{build_hamiltonian, diagonalize, ModelSpec, ZeroPoint};

#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub assignment: Vec<u32>,
    pub polyad: u32,
    pub energy: f64,
}

impl Level {
    pub fn new(assignment: Vec<u32>, energy: f64) -> Self {
        let polyad = assignment.iter().sum();
        Level {
            assignment,
            polyad,
            energy,
        }
    }
}

/// Assigned vibrational levels, sorted by energy and then by assignment.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LevelSpectrum {
    levels: Vec<Level>,
}

impl LevelSpectrum {
    /// Validates finiteness, unique assignments and a common mode count.
    pub fn new(mut levels: Vec<Level>) -> Result<Self> {
        let modes = levels.first().map(|l| l.assignment.len());
        let mut seen = std::collections::BTreeSet::new();
        for level in &levels {
            if Some(level.assignment.len()) != modes {
                return Err(Error::Argument(
                    "levels disagree on the number of modes".into(),
                ));
            }
            if !level.energy.is_finite() {
                return Err(Error::Argument(format!(
                    "level {:?} has non-finite energy",
                    level.assignment
                )));
            }
            if level.polyad != level.assignment.iter().sum::<u32>() {
                return Err(Error::Argument(format!(
                    "level {:?} has inconsistent polyad {}",
                    level.assignment, level.polyad
                )));
            }
            if !seen.insert(level.assignment.clone()) {
                return Err(Error::Argument(format!(
                    "duplicate assignment {:?}",
                    level.assignment
                )));
            }
        }
        levels.sort_by(|a, b| {
            a.energy
                .total_cmp(&b.energy)
                .then_with(|| a.assignment.cmp(&b.assignment))
        });
        Ok(LevelSpectrum { levels })
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn modes(&self) -> Option<usize> {
        self.levels.first().map(|l| l.assignment.len())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Level> {
        self.levels.iter()
    }

    pub fn energy_of(&self, assignment: &[u32]) -> Option<f64> {
        self.levels
            .iter()
            .find(|l| l.assignment == assignment)
            .map(|l| l.energy)
    }

    pub fn by_assignment(&self) -> BTreeMap<Vec<u32>, f64> {
        self.levels
            .iter()
            .map(|l| (l.assignment.clone(), l.energy))
            .collect()
    }

    /// Energy of the all-zero assignment if present, otherwise the lowest level.
    pub fn ground_energy(&self) -> Option<f64> {
        let modes = self.modes()?;
        self.energy_of(&vec![0; modes])
            .or_else(|| self.levels.first().map(|l| l.energy))
    }

    /// Energies measured from [`Self::ground_energy`].
    pub fn ground_referenced(&self) -> Self {
        let shift = self.ground_energy().unwrap_or(0.0);
        self.shifted(-shift)
    }

    pub fn shifted(&self, offset: f64) -> Self {
        let levels = self
            .levels
            .iter()
            .map(|l| Level {
                energy: l.energy + offset,
                ..l.clone()
            })
            .collect();
        LevelSpectrum::new(levels).expect("shift preserves validity")
    }

    /// Keeps levels with total quanta `<= max_polyad`.
    pub fn within_polyad(&self, max_polyad: u32) -> Self {
        LevelSpectrum {
            levels: self
                .levels
                .iter()
                .filter(|l| l.polyad <= max_polyad)
                .cloned()
                .collect(),
        }
    }
}

fn apply_zero_point(spec: &ModelSpec, raw: LevelSpectrum) -> Result<LevelSpectrum> {
    Ok(match spec.zero_point {
        ZeroPoint::Raw => raw,
        ZeroPoint::GroundReferenced => {
            let ground = spec.diagonal_energy(&vec![0; spec.modes])?;
            raw.shifted(-ground)
        }
    })
}

/// Closed-form levels of a diagonal family on every basis label.
///
/// Ground-referenced specs subtract `E(0, ..., 0)`. Models with coupling
/// terms have no closed form; use [`model_levels`] or [`diagonalize`].
pub fn analytic_levels(spec: &ModelSpec, basis: &FockBasis) -> Result<LevelSpectrum> {
    spec.validate()?;
    if !spec.couplings.is_empty() {
        return Err(Error::Unsupported(
            "closed-form levels exist only without coupling terms; diagonalize instead".into(),
        ));
    }
    if basis.modes() != spec.modes {
        return Err(Error::Argument(format!(
            "basis has {} modes, model has {}",
            basis.modes(),
            spec.modes
        )));
    }
    let levels = basis
        .labels()
        .map(|label| {
            let energy = spec.diagonal_energy(&label)?;
            Ok(Level::new(label, energy))
        })
        .collect::<Result<Vec<_>>>()?;
    apply_zero_point(spec, LevelSpectrum::new(levels)?)
}

/// Levels of any model: closed form when diagonal, polyad-blocked
/// diagonalization when couplings are present.
pub fn model_levels(spec: &ModelSpec, basis: &FockBasis) -> Result<LevelSpectrum> {
    if spec.couplings.is_empty() {
        return analytic_levels(spec, basis);
    }
    let h = build_hamiltonian(spec, basis)?;
    apply_zero_point(spec, diagonalize(&h)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deformation::DeformationParameter;
    use crate::models::{Family, ZeroPoint};

    #[test]
    fn q_coupled_examples() {
        let spec = ModelSpec::q_coupled(2, 0.1, 1.0).unwrap();
        let basis = FockBasis::new(2, 3).unwrap();
        let levels = analytic_levels(&spec, &basis).unwrap();
        assert_eq!(levels.len(), 16);
        assert_eq!(levels.energy_of(&[0, 0]), Some(0.0));
        assert!((levels.energy_of(&[1, 1]).unwrap() - 2.105_170_918_075_648).abs() < 1e-14);
        assert!(levels
            .levels()
            .windows(2)
            .all(|w| w[0].energy <= w[1].energy));
        // equal energies fall back to lexicographic assignment order
        let e1: Vec<_> = levels
            .iter()
            .filter(|l| l.polyad == 1)
            .map(|l| l.assignment.clone())
            .collect();
        assert_eq!(e1, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn empirical_harmonic_raw() {
        let spec = ModelSpec::empirical_triatomic([1.0, 1.0], [0.0, 0.0], 0.0)
            .unwrap()
            .with_zero_point(ZeroPoint::Raw);
        let levels = analytic_levels(&spec, &FockBasis::new(2, 3).unwrap()).unwrap();
        for l in levels.iter() {
            assert_eq!(l.energy, (l.polyad + 1) as f64);
        }
    }

    #[test]
    fn undeformed_single_oscillators() {
        for family in [Family::QSingle, Family::SymmetricSingle] {
            let d = match family {
                Family::QSingle => DeformationParameter::q_real(0.0).unwrap(),
                _ => DeformationParameter::symmetric_phase(0.0).unwrap(),
            };
            let spec = ModelSpec::single(family, d, 2.0, None)
                .unwrap()
                .with_zero_point(ZeroPoint::Raw);
            let levels = analytic_levels(&spec, &FockBasis::new(1, 6).unwrap()).unwrap();
            for l in levels.iter() {
                assert!((l.energy - 2.0 * (l.assignment[0] as f64 + 0.5)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn couplings_rejected_by_closed_form() {
        let spec = ModelSpec::q_coupled(2, 0.1, 1.0)
            .unwrap()
            .with_couplings(vec![crate::models::CouplingTerm {
                kind: crate::models::CouplingKind::Bilinear,
                modes: [1, 2],
                strength: 0.1,
            }])
            .unwrap();
        assert!(matches!(
            analytic_levels(&spec, &FockBasis::new(2, 2).unwrap()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn spectrum_validation() {
        let dup = vec![Level::new(vec![0, 1], 1.0), Level::new(vec![0, 1], 2.0)];
        assert!(LevelSpectrum::new(dup).is_err());
        let nan = vec![Level::new(vec![0], f64::NAN)];
        assert!(LevelSpectrum::new(nan).is_err());
        let ragged = vec![Level::new(vec![0], 0.0), Level::new(vec![0, 1], 1.0)];
        assert!(LevelSpectrum::new(ragged).is_err());
    }

    #[test]
    fn polyad_filter() {
        let spec = ModelSpec::q_coupled(2, 0.1, 1.0).unwrap();
        let levels = analytic_levels(&spec, &FockBasis::new(2, 3).unwrap()).unwrap();
        assert_eq!(levels.within_polyad(3).len(), 10);
    }
}
