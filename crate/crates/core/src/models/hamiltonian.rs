use crate::deformation::{DeformationKind, QDeformation};
use crate::error::{Error, Result};
use crate::fock::{lowering_q_with, lowering_symmetric, FockBasis, OperatorMatrix};

use super::{CouplingKind, CouplingTerm, Family, ModelSpec};

/// Matrix element of one coupling between Q-oscillator states.
///
/// Bilinear: `<n_i+1, n_j-1| b_i^dagger b_j |n_i, n_j> = sqrt([n_i+1][n_j])`.
/// Darling-Dennison: `<n_i+2, n_j-2| b_i^dagger^2 b_j^2 |n_i, n_j> =
/// sqrt([n_i+2][n_i+1][n_j][n_j-1])`. `None` when the state is annihilated.
pub fn coupling_element(kind: CouplingKind, n_i: u32, n_j: u32, q: &QDeformation) -> Option<f64> {
    let b = |n: u32| q.bracket(n as f64);
    match kind {
        CouplingKind::Bilinear if n_j >= 1 => Some((b(n_i + 1) * b(n_j)).sqrt()),
        CouplingKind::DarlingDennison if n_j >= 2 => {
            Some((b(n_i + 2) * b(n_i + 1) * b(n_j) * b(n_j - 1)).sqrt())
        }
        _ => None,
    }
}

fn coupling_shift(kind: CouplingKind) -> u32 {
    match kind {
        CouplingKind::Bilinear => 1,
        CouplingKind::DarlingDennison => 2,
    }
}

/// Deformation of the b-operators used by coupling terms.
///
/// Q families use their own `T`; the empirical families use ordinary bosons.
fn coupling_deformation(spec: &ModelSpec) -> Result<QDeformation> {
    match spec.family.deformation_kind() {
        Some(DeformationKind::QReal) => spec.q_deformation(),
        None => Ok(QDeformation::undeformed()),
        Some(_) => Err(Error::Unsupported(
            "coupling terms are defined for Q-oscillator and empirical families only".into(),
        )),
    }
}

fn add_coupling(h: &mut OperatorMatrix, term: &CouplingTerm, q: &QDeformation) {
    let basis = *h.basis();
    let (i, j) = (term.modes[0] - 1, term.modes[1] - 1);
    let shift = coupling_shift(term.kind);
    for (col, label) in basis.labels().enumerate() {
        let Some(element) = coupling_element(term.kind, label[i], label[j], q) else {
            continue;
        };
        let mut target = label.clone();
        target[i] += shift;
        target[j] -= shift;
        let Some(row) = basis.index(&target) else {
            continue;
        };
        let e = h.entries_mut();
        e[(row, col)] += term.strength * element;
        e[(col, row)] += term.strength * element;
    }
}

/// Hamiltonian matrix of a model on a basis.
///
/// The diagonal is the level formula of the family evaluated at each basis
/// label; every coupling adds `strength * (X + X^dagger)` with the Q-boson
/// matrix elements of [`coupling_element`]. Energies are raw (no zero-point
/// shift).
pub fn build_hamiltonian(spec: &ModelSpec, basis: &FockBasis) -> Result<OperatorMatrix> {
    spec.validate()?;
    if basis.modes() != spec.modes {
        return Err(Error::Argument(format!(
            "basis has {} modes, model has {}",
            basis.modes(),
            spec.modes
        )));
    }
    let mut h = OperatorMatrix::zeros(basis);
    for (i, label) in basis.labels().enumerate() {
        h.entries_mut()[(i, i)] = spec.diagonal_energy(&label)?;
    }
    if !spec.couplings.is_empty() {
        let q = coupling_deformation(spec)?;
        for term in &spec.couplings {
            add_coupling(&mut h, term, &q);
        }
    }
    Ok(h)
}

/// Two-mode operator-product forms of the coupled Hamiltonians.
///
/// * `Q_coupled`: `b1^dagger b1 (Q^N2 + 1)/2 + (Q^N1 + 1)/2 b2^dagger b2`
/// * `Q_generalized`: `[X1](Q^X2 + 1)/2 + (Q^X1 + 1)/2 [X2]` with `X_i = N_i + c_i N_i^2`
/// * `q_coupled`: `a1^dagger a1 q^N2 + q^-N1 a2^dagger a2`; for a phase
///   deformation this is the real part, the imaginary part cancelling identically.
///
/// All are scaled by `spec.scale`; couplings are not included. These forms
/// exist to be compared against [`build_hamiltonian`].
pub fn product_form_hamiltonian(spec: &ModelSpec, basis: &FockBasis) -> Result<OperatorMatrix> {
    spec.validate()?;
    if spec.modes != 2 || basis.modes() != 2 {
        return Err(Error::Argument(
            "product forms are defined for two modes".into(),
        ));
    }
    let h = match spec.family {
        Family::QCoupled => {
            let q = spec.q_deformation()?;
            let b1 = lowering_q_with(basis, 1, &q)?;
            let b2 = lowering_q_with(basis, 2, &q)?;
            let n1 = b1.transpose().try_mul(&b1)?;
            let n2 = b2.transpose().try_mul(&b2)?;
            let w2 = OperatorMatrix::diagonal_from(basis, |l| (q.pow(l[1] as f64) + 1.0) / 2.0);
            let w1 = OperatorMatrix::diagonal_from(basis, |l| (q.pow(l[0] as f64) + 1.0) / 2.0);
            n1.try_mul(&w2)?.try_add(&w1.try_mul(&n2)?)?
        }
        Family::QGeneralized => {
            let q = spec.q_deformation()?;
            let c = spec.c.clone();
            OperatorMatrix::diagonal_from(basis, |l| {
                let x1 = l[0] as f64 + c[0] * (l[0] as f64).powi(2);
                let x2 = l[1] as f64 + c[1] * (l[1] as f64).powi(2);
                q.bracket(x1) * (q.pow(x2) + 1.0) / 2.0 + (q.pow(x1) + 1.0) / 2.0 * q.bracket(x2)
            })
        }
        Family::SymmetricCoupled => {
            let d = spec.deformation.expect("validated");
            let s = d.as_symmetric()?;
            let a1 = lowering_symmetric(basis, 1, &d)?;
            let a2 = lowering_symmetric(basis, 2, &d)?;
            let n1 = a1.transpose().try_mul(&a1)?;
            let n2 = a2.transpose().try_mul(&a2)?;
            let w2 = OperatorMatrix::diagonal_from(basis, |l| s.pow_re(l[1] as f64));
            let w1 = OperatorMatrix::diagonal_from(basis, |l| s.pow_re(-(l[0] as f64)));
            n1.try_mul(&w2)?.try_add(&w1.try_mul(&n2)?)?
        }
        other => {
            return Err(Error::Unsupported(format!(
                "family {other:?} has no two-mode product form"
            )))
        }
    };
    Ok(h.scaled(spec.scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deformation::DeformationParameter;
    use approx::assert_relative_eq;

    #[test]
    fn coupling_elements() {
        let q0 = QDeformation::undeformed();
        let q = QDeformation::new(0.1).unwrap();
        assert_eq!(
            coupling_element(CouplingKind::Bilinear, 0, 1, &q0),
            Some(1.0)
        );
        let two = 2.105_170_918_075_648;
        assert_relative_eq!(
            coupling_element(CouplingKind::Bilinear, 1, 2, &q).unwrap(),
            two,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            coupling_element(CouplingKind::DarlingDennison, 0, 2, &q).unwrap(),
            two,
            max_relative = 1e-14
        );
        assert_eq!(coupling_element(CouplingKind::Bilinear, 3, 0, &q), None);
        assert_eq!(
            coupling_element(CouplingKind::DarlingDennison, 3, 1, &q),
            None
        );
    }

    #[test]
    fn diagonal_family_matrix() {
        let spec = ModelSpec::q_coupled(2, 0.1, 1.0).unwrap();
        let basis = FockBasis::new(2, 4).unwrap();
        let h = build_hamiltonian(&spec, &basis).unwrap();
        let q = QDeformation::new(0.1).unwrap();
        for (i, l) in basis.labels().enumerate() {
            assert_eq!(h.entries()[(i, i)], q.bracket((l[0] + l[1]) as f64));
        }
        assert_eq!(h.asymmetry(), 0.0);
        assert!(build_hamiltonian(&spec, &FockBasis::new(3, 2).unwrap()).is_err());
    }

    #[test]
    fn zero_strength_coupling_is_inert() {
        let spec = ModelSpec::q_coupled(2, 0.1, 1.0).unwrap();
        let basis = FockBasis::new(2, 4).unwrap();
        let coupled = spec
            .clone()
            .with_couplings(vec![CouplingTerm {
                kind: CouplingKind::Bilinear,
                modes: [1, 2],
                strength: 0.0,
            }])
            .unwrap();
        assert_eq!(
            build_hamiltonian(&spec, &basis).unwrap(),
            build_hamiltonian(&coupled, &basis).unwrap()
        );
    }

    #[test]
    fn couplings_are_symmetric_and_placed() {
        let spec = ModelSpec::q_coupled(2, 0.1, 1.0)
            .unwrap()
            .with_couplings(vec![
                CouplingTerm {
                    kind: CouplingKind::Bilinear,
                    modes: [1, 2],
                    strength: 0.3,
                },
                CouplingTerm {
                    kind: CouplingKind::DarlingDennison,
                    modes: [2, 1],
                    strength: -0.2,
                },
            ])
            .unwrap();
        let basis = FockBasis::new(2, 4).unwrap();
        let h = build_hamiltonian(&spec, &basis).unwrap();
        assert_eq!(h.asymmetry(), 0.0);
        let q = QDeformation::new(0.1).unwrap();
        let bl = 0.3 * (q.bracket(2.0) * q.bracket(2.0)).sqrt();
        assert_relative_eq!(h.get(&[2, 1], &[1, 2]), bl, max_relative = 1e-14);
        assert_relative_eq!(h.get(&[1, 2], &[2, 1]), bl, max_relative = 1e-14);
        // DD on modes (2,1): (n2, n1) -> (n2+2, n1-2)
        let dd = -0.2 * (q.bracket(2.0) * q.bracket(1.0) * q.bracket(3.0) * q.bracket(2.0)).sqrt();
        assert_relative_eq!(h.get(&[1, 2], &[3, 0]), dd, max_relative = 1e-14);
    }

    #[test]
    fn symmetric_families_reject_couplings() {
        let d = DeformationParameter::symmetric_real(0.1).unwrap();
        let spec = ModelSpec::symmetric_coupled(2, d, 1.0)
            .unwrap()
            .with_couplings(vec![CouplingTerm {
                kind: CouplingKind::Bilinear,
                modes: [1, 2],
                strength: 0.1,
            }])
            .unwrap();
        let basis = FockBasis::new(2, 3).unwrap();
        assert!(matches!(
            build_hamiltonian(&spec, &basis),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn phase_product_form_imaginary_part_cancels() {
        let s = DeformationParameter::symmetric_phase(0.2)
            .unwrap()
            .as_symmetric()
            .unwrap();
        for n1 in 0..8 {
            for n2 in 0..8 {
                let (a, b) = (n1 as f64, n2 as f64);
                let im = s.bracket(a) * s.pow_im(b) + s.pow_im(-a) * s.bracket(b);
                assert!(im.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn product_form_needs_two_modes() {
        let spec = ModelSpec::q_coupled(3, 0.1, 1.0).unwrap();
        let basis = FockBasis::new(3, 2).unwrap();
        assert!(product_form_hamiltonian(&spec, &basis).is_err());
    }
}
