//! Schwinger realizations of the deformed su(2) algebras on two modes.
//!
//! * symmetric q-bosons: `J0 = (N1 - N2)/2`, `J+ = a1^dagger a2`, `J- = a2^dagger a1`,
//!   closing on `[J+, J-] = [2 J0]_q`;
//! * Q-bosons: `J0 = (N1 - N2)/2`, `J+ = b1^dagger Q^(-N2/2) b2`, `J- = (J+)^dagger`,
//!   closing on `J+ J- - Q^-1 J- J+ = [2 J0]_Q`.
//!
//! Identities are checked as `P (lhs - rhs) P` with a margin projector `P`
//! because products that raise a mode pass through the truncated cutoff row.

use std::collections::BTreeMap;

use crate::deformation::{DeformationKind, DeformationParameter};
use crate::error::{Error, Result};
use crate::fock::{
    check_phase_window, commutator, lowering_q_with, lowering_symmetric, margin_projector,
    FockBasis, OperatorMatrix,
};
use crate::report::{Check, VerificationReport};

pub const DEFAULT_MARGIN: u32 = 2;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorTriple {
    pub j0: OperatorMatrix,
    pub j_plus: OperatorMatrix,
    pub j_minus: OperatorMatrix,
    pub deformation: DeformationParameter,
}

impl GeneratorTriple {
    pub fn basis(&self) -> &FockBasis {
        self.j0.basis()
    }
}

fn require_two_modes(basis: &FockBasis) -> Result<()> {
    if basis.modes() == 2 {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "Schwinger realization needs 2 modes, basis has {}",
            basis.modes()
        )))
    }
}

fn j0(basis: &FockBasis) -> OperatorMatrix {
    OperatorMatrix::diagonal_from(basis, |l| (l[0] as f64 - l[1] as f64) / 2.0)
}

/// su_q(2) generators from symmetric q-bosons.
pub fn symmetric_generators(
    basis: &FockBasis,
    d: &DeformationParameter,
) -> Result<GeneratorTriple> {
    require_two_modes(basis)?;
    let a1 = lowering_symmetric(basis, 1, d)?;
    let a2 = lowering_symmetric(basis, 2, d)?;
    let j_plus = a1.transpose().try_mul(&a2)?;
    let j_minus = a2.transpose().try_mul(&a1)?;
    Ok(GeneratorTriple {
        j0: j0(basis),
        j_plus,
        j_minus,
        deformation: *d,
    })
}

/// su_Q(2) generators from Q-bosons.
pub fn q_generators(basis: &FockBasis, d: &DeformationParameter) -> Result<GeneratorTriple> {
    require_two_modes(basis)?;
    let q = d.as_q()?;
    let b1 = lowering_q_with(basis, 1, &q)?;
    let b2 = lowering_q_with(basis, 2, &q)?;
    let damping = OperatorMatrix::diagonal_from(basis, |l| q.pow(-(l[1] as f64) / 2.0));
    let j_plus = b1.transpose().try_mul(&damping)?.try_mul(&b2)?;
    let j_minus = j_plus.transpose();
    Ok(GeneratorTriple {
        j0: j0(basis),
        j_plus,
        j_minus,
        deformation: *d,
    })
}

/// Build the generators matching the deformation kind.
pub fn generators(basis: &FockBasis, d: &DeformationParameter) -> Result<GeneratorTriple> {
    match d.kind() {
        DeformationKind::QReal => q_generators(basis, d),
        _ => symmetric_generators(basis, d),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CasimirForm {
    /// `Q^-J0 ([J0][J0+1] + Q^-1 J- J+)`
    First,
    /// `Q^-J0 (J+ J- + Q [J0][J0-1])`
    Second,
    /// `-[(N1+N2)/2 + 1] [-(N1+N2)/2]`
    Closed,
}

/// su_Q(2) Casimir operator in one of its three equivalent forms.
pub fn casimir_q(
    basis: &FockBasis,
    d: &DeformationParameter,
    form: CasimirForm,
) -> Result<OperatorMatrix> {
    let q = d.as_q()?;
    let half_diff = |l: &[u32]| (l[0] as f64 - l[1] as f64) / 2.0;
    match form {
        CasimirForm::Closed => {
            require_two_modes(basis)?;
            Ok(OperatorMatrix::diagonal_from(basis, |l| {
                let s = (l[0] + l[1]) as f64 / 2.0;
                -q.bracket(s + 1.0) * q.bracket(-s)
            }))
        }
        CasimirForm::First | CasimirForm::Second => {
            let g = q_generators(basis, d)?;
            let prefactor = OperatorMatrix::diagonal_from(basis, |l| q.pow(-half_diff(l)));
            let inner = if form == CasimirForm::First {
                let diag = OperatorMatrix::diagonal_from(basis, |l| {
                    let j = half_diff(l);
                    q.bracket(j) * q.bracket(j + 1.0)
                });
                diag.try_add(&g.j_minus.try_mul(&g.j_plus)?.scaled(1.0 / q.pow(1.0)))?
            } else {
                let diag = OperatorMatrix::diagonal_from(basis, |l| {
                    let j = half_diff(l);
                    q.pow(1.0) * q.bracket(j) * q.bracket(j - 1.0)
                });
                g.j_plus.try_mul(&g.j_minus)?.try_add(&diag)?
            };
            prefactor.try_mul(&inner)
        }
    }
}

fn projected_residual(
    lhs: &OperatorMatrix,
    rhs: &OperatorMatrix,
    p: &OperatorMatrix,
) -> Result<f64> {
    Ok(lhs.try_sub(rhs)?.project(p)?.max_abs())
}

/// `[2 J0]` as a diagonal operator, using the bracket of the triple's kind.
fn bracket_two_j0(g: &GeneratorTriple) -> Result<OperatorMatrix> {
    let basis = g.basis();
    match g.deformation.kind() {
        DeformationKind::QReal => {
            let q = g.deformation.as_q()?;
            Ok(OperatorMatrix::diagonal_from(basis, |l| {
                q.bracket(l[0] as f64 - l[1] as f64)
            }))
        }
        _ => {
            let s = g.deformation.as_symmetric()?;
            Ok(OperatorMatrix::diagonal_from(basis, |l| {
                s.bracket(l[0] as f64 - l[1] as f64)
            }))
        }
    }
}

/// Checks the commutation relations of an already built generator triple.
pub fn verify_generators(g: &GeneratorTriple, margin: u32, tol: f64) -> Result<VerificationReport> {
    let basis = *g.basis();
    let p = margin_projector(&basis, margin)?;
    let mut report = VerificationReport::default();
    let tag = match g.deformation.kind() {
        DeformationKind::QReal => "suQ2",
        _ => "suq2",
    };

    report.push(Check::new(
        format!("{tag}.j_minus_is_transpose"),
        "J- = (J+)^dagger",
        g.j_minus.try_sub(&g.j_plus.transpose())?.max_abs(),
        tol,
    ));
    let j0_half_integer =
        g.j0.diagonal()
            .iter()
            .map(|v| (2.0 * v - (2.0 * v).round()).abs())
            .fold(0.0, f64::max);
    let j0_off = g.j0.try_sub(&OperatorMatrix::diagonal_from(&basis, |l| {
        (l[0] as f64 - l[1] as f64) / 2.0
    }))?;
    report.push(Check::new(
        format!("{tag}.j0_diagonal_half_integer"),
        "J0 = (N1 - N2)/2",
        j0_half_integer.max(j0_off.max_abs()),
        tol,
    ));
    report.push(Check::new(
        format!("{tag}.j0_jplus"),
        "[J0, J+] = J+",
        projected_residual(&commutator(&g.j0, &g.j_plus)?, &g.j_plus, &p)?,
        tol,
    ));
    report.push(Check::new(
        format!("{tag}.j0_jminus"),
        "[J0, J-] = -J-",
        projected_residual(&commutator(&g.j0, &g.j_minus)?, &g.j_minus.scaled(-1.0), &p)?,
        tol,
    ));

    let two_j0 = bracket_two_j0(g)?;
    let closing = match g.deformation.kind() {
        DeformationKind::QReal => {
            let q = g.deformation.as_q()?;
            let lhs = g
                .j_plus
                .try_mul(&g.j_minus)?
                .try_sub(&g.j_minus.try_mul(&g.j_plus)?.scaled(1.0 / q.pow(1.0)))?;
            Check::new(
                format!("{tag}.closing"),
                "J+ J- - Q^-1 J- J+ = [2 J0]_Q",
                projected_residual(&lhs, &two_j0, &p)?,
                tol,
            )
        }
        _ => Check::new(
            format!("{tag}.closing"),
            "[J+, J-] = [2 J0]_q",
            projected_residual(&commutator(&g.j_plus, &g.j_minus)?, &two_j0, &p)?,
            tol,
        ),
    };
    report.push(closing);
    Ok(report)
}

/// Spread of diagonal entries among states sharing `n1 + n2`, plus the
/// largest off-diagonal entry.
fn total_quanta_spread(op: &OperatorMatrix, p: Option<&OperatorMatrix>) -> f64 {
    let basis = op.basis();
    let mut groups: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    let mut off = 0.0f64;
    let e = op.entries();
    for i in 0..basis.dimension() {
        let keep_i = p.is_none_or(|p| p.entries()[(i, i)] != 0.0);
        if !keep_i {
            continue;
        }
        for j in 0..basis.dimension() {
            let keep_j = p.is_none_or(|p| p.entries()[(j, j)] != 0.0);
            if i != j && keep_j {
                off = off.max(e[(i, j)].abs());
            }
        }
        let total = basis.label(i).iter().sum();
        let v = e[(i, i)];
        let g = groups.entry(total).or_insert((v, v));
        g.0 = g.0.min(v);
        g.1 = g.1.max(v);
    }
    groups.values().map(|(lo, hi)| hi - lo).fold(off, f64::max)
}

/// Hamiltonian `[N1 + N2]` with the bracket of the given kind.
fn total_quanta_hamiltonian(basis: &FockBasis, d: &DeformationParameter) -> Result<OperatorMatrix> {
    Ok(match d.kind() {
        DeformationKind::QReal => {
            let q = d.as_q()?;
            OperatorMatrix::diagonal_from(basis, |l| q.bracket((l[0] + l[1]) as f64))
        }
        _ => {
            let s = d.as_symmetric()?;
            check_phase_window(basis, &s)?;
            OperatorMatrix::diagonal_from(basis, |l| s.bracket((l[0] + l[1]) as f64))
        }
    })
}

/// Full algebra verification on a two-mode basis.
///
/// Covers the generator relations, and for the Q kind the agreement of the
/// three Casimir forms and their dependence on `n1 + n2` only. Every kind
/// also checks that `[N1 + N2]` commutes with all generators.
pub fn verify_algebra(
    basis: &FockBasis,
    d: &DeformationParameter,
    margin: u32,
    tol: f64,
) -> Result<VerificationReport> {
    if margin < 1 {
        return Err(Error::Argument("algebra checks need margin >= 1".into()));
    }
    let g = generators(basis, d)?;
    let mut report = verify_generators(&g, margin, tol)?;
    let p = margin_projector(basis, margin)?;
    let tag = if d.kind() == DeformationKind::QReal {
        "suQ2"
    } else {
        "suq2"
    };

    if d.kind() == DeformationKind::QReal {
        let first = casimir_q(basis, d, CasimirForm::First)?;
        let second = casimir_q(basis, d, CasimirForm::Second)?;
        let closed = casimir_q(basis, d, CasimirForm::Closed)?;
        report.push(Check::new(
            "suQ2.casimir_first_vs_second",
            "Q^-J0([J0][J0+1] + Q^-1 J-J+) = Q^-J0(J+J- + Q[J0][J0-1])",
            projected_residual(&first, &second, &p)?,
            tol,
        ));
        report.push(Check::new(
            "suQ2.casimir_first_vs_closed",
            "C = -[(N1+N2)/2 + 1]_Q [-(N1+N2)/2]_Q",
            projected_residual(&first, &closed, &p)?,
            tol,
        ));
        report.push(Check::new(
            "suQ2.casimir_depends_on_total",
            "C is diagonal and a function of N1 + N2 only",
            total_quanta_spread(&closed, None).max(total_quanta_spread(&first, Some(&p))),
            tol,
        ));
    }

    let h = total_quanta_hamiltonian(basis, d)?;
    for (name, op) in [("j0", &g.j0), ("jplus", &g.j_plus), ("jminus", &g.j_minus)] {
        report.push(Check::new(
            format!("{tag}.hamiltonian_commutes_{name}"),
            "[[N1 + N2], J] = 0",
            commutator(&h, op)?.project(&p)?.max_abs(),
            tol,
        ));
    }
    Ok(report)
}
