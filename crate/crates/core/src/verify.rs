//! The full invariant suite: bracket laws, Fock-space relations, algebra
//! relations, Hamiltonian identities and polyad structure.
//!
//! One deformation drives every check. A Q deformation `T` is paired with
//! the symmetric real deformation `tau = T/2` (so that `Q = q^2`), and a
//! symmetric deformation `tau` with `T = 2 tau`. Relations that need a real
//! `q` are skipped for a phase deformation.

use crate::algebra::{verify_algebra, DEFAULT_MARGIN, DEFAULT_TOLERANCE};
use crate::deformation::{
    DeformationKind, DeformationParameter, QDeformation, SymmetricDeformation,
};
use crate::error::{Error, Result};
use crate::fock::{
    commutator, lowering_q_with, lowering_symmetric, margin_projector, number_operator,
    total_number_operator, FockBasis, OperatorMatrix,
};
use crate::models::{
    analytic_levels, build_hamiltonian, diagonalize, jacobi_eigen, polyad_decompose,
    product_form_hamiltonian, CouplingKind, CouplingTerm, ModelSpec, ZeroPoint,
};
use crate::report::{Check, VerificationReport};

/// Tolerance of the exact scalar and operator identities.
pub const EXACT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    /// Per-mode cutoff of the two-mode basis.
    pub n_max: u32,
    /// Margin of the projector used by the algebra relations.
    pub margin: u32,
    /// Replaces every per-check tolerance when set.
    pub tolerance: Option<f64>,
    /// Anharmonicity coefficients of the generalized-oscillator identity.
    pub c: [f64; 2],
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            n_max: 8,
            margin: DEFAULT_MARGIN,
            tolerance: None,
            c: [0.02, 0.05],
        }
    }
}

/// `(Q deformation, symmetric deformation)` paired as described in the module docs.
fn paired(d: &DeformationParameter) -> Result<(DeformationParameter, DeformationParameter)> {
    Ok(match d.kind() {
        DeformationKind::QReal => (*d, DeformationParameter::symmetric_real(d.value() / 2.0)?),
        _ => (DeformationParameter::q_real(2.0 * d.value())?, *d),
    })
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Scalar bracket laws on the integer grid `0..=10`.
pub fn bracket_law_checks(d: &DeformationParameter) -> Result<VerificationReport> {
    let (qd, sd) = paired(d)?;
    let q = qd.as_q()?;
    let s = sd.as_symmetric()?;
    let grid = || (0..=10).flat_map(|a| (0..=10).map(move |b| (a as f64, b as f64)));
    let mut report = VerificationReport::default();

    let addition = grid()
        .map(|(a, b)| relative(q.bracket(a + b), q.bracket(a) + q.pow(a) * q.bracket(b)))
        .fold(0.0, f64::max);
    report.push(Check::new(
        "bracket.q_addition",
        "[a+b]_Q = [a]_Q + Q^a [b]_Q",
        addition,
        EXACT_TOLERANCE,
    ));

    let recurrence = (-20..=20)
        .map(|k| k as f64 / 2.0)
        .map(|x| relative(q.bracket(x + 1.0), q.pow(1.0) * q.bracket(x) + 1.0))
        .fold(0.0, f64::max);
    report.push(Check::new(
        "bracket.q_recurrence",
        "[x+1]_Q = Q [x]_Q + 1",
        recurrence,
        EXACT_TOLERANCE,
    ));

    // Re(q^b) is q^b for a real deformation and cos(b tau) for a phase
    let symmetric = grid()
        .map(|(a, b)| {
            relative(
                s.bracket(a + b),
                s.bracket(a) * s.pow_re(b) + s.pow_re(-a) * s.bracket(b),
            )
        })
        .fold(0.0, f64::max);
    report.push(Check::new(
        "bracket.symmetric_addition",
        "[a+b]_q = [a]_q q^b + q^-a [b]_q",
        symmetric,
        EXACT_TOLERANCE,
    ));

    let tiny_q = QDeformation::new(1e-13)?;
    let tiny_s = DeformationParameter::new(sd.kind(), 1e-13)?.as_symmetric()?;
    let continuity = (0..=20)
        .map(|k| k as f64 / 2.0 - 3.0)
        .map(|x| {
            (tiny_q.bracket(x) - x)
                .abs()
                .max((tiny_s.bracket(x) - x).abs())
        })
        .fold(0.0, f64::max);
    report.push(Check::new(
        "bracket.continuity",
        "[x] -> x as the deformation -> 0",
        continuity,
        1e-9,
    ));
    Ok(report)
}

fn projected(expr: &OperatorMatrix, p: &OperatorMatrix) -> Result<f64> {
    Ok(expr.project(p)?.max_abs())
}

/// Deformed-boson relations on a two-mode basis.
pub fn fock_checks(d: &DeformationParameter, n_max: u32) -> Result<VerificationReport> {
    let (qd, sd) = paired(d)?;
    let q = qd.as_q()?;
    let s = sd.as_symmetric()?;
    let basis = FockBasis::new(2, n_max)?;
    let p1 = margin_projector(&basis, 1)?;
    let id = OperatorMatrix::identity(&basis);
    let mut report = VerificationReport::default();

    let b = [
        lowering_q_with(&basis, 1, &q)?,
        lowering_q_with(&basis, 2, &q)?,
    ];
    let n = [number_operator(&basis, 1)?, number_operator(&basis, 2)?];
    let mut number = 0.0f64;
    let mut raised = 0.0f64;
    let mut deformed = 0.0f64;
    let mut shift = 0.0f64;
    for m in 0..2 {
        let bd = b[m].transpose();
        let bdb = bd.try_mul(&b[m])?;
        let bbd = b[m].try_mul(&bd)?;
        let diag_n = OperatorMatrix::diagonal_from(&basis, |l| q.bracket(l[m] as f64));
        let diag_n1 = OperatorMatrix::diagonal_from(&basis, |l| q.bracket(l[m] as f64 + 1.0));
        number = number.max(bdb.try_sub(&diag_n)?.max_abs());
        raised = raised.max(projected(&bbd.try_sub(&diag_n1)?, &p1)?);
        let rel = bbd.try_sub(&bdb.scaled(q.pow(1.0)))?.try_sub(&id)?;
        deformed = deformed.max(projected(&rel, &p1)?);
        let up = commutator(&n[m], &bd)?.try_sub(&bd)?;
        let down = commutator(&n[m], &b[m])?.try_add(&b[m])?;
        shift = shift.max(projected(&up, &p1)?).max(projected(&down, &p1)?);
    }
    report.push(Check::new(
        "fock.number_relation",
        "b^dagger b = [N]_Q",
        number,
        EXACT_TOLERANCE,
    ));
    report.push(Check::new(
        "fock.raised_number_relation",
        "b b^dagger = [N+1]_Q",
        raised,
        EXACT_TOLERANCE,
    ));
    report.push(Check::new(
        "fock.q_commutation",
        "b b^dagger - Q b^dagger b = 1",
        deformed,
        EXACT_TOLERANCE,
    ));
    report.push(Check::new(
        "fock.number_shift",
        "[N, b^dagger] = b^dagger, [N, b] = -b",
        shift,
        EXACT_TOLERANCE,
    ));

    let distinct = commutator(&b[0], &b[1])?
        .max_abs()
        .max(commutator(&b[0], &b[1].transpose())?.max_abs());
    report.push(Check::new(
        "fock.distinct_modes_commute",
        "[b1, b2] = [b1, b2^dagger] = 0",
        distinct,
        EXACT_TOLERANCE,
    ));

    if !s.is_phase() {
        report.extend(symmetric_real_checks(&basis, &sd, &s, &q, &p1)?);
    }
    Ok(report)
}

fn symmetric_real_checks(
    basis: &FockBasis,
    sd: &DeformationParameter,
    s: &SymmetricDeformation,
    q: &QDeformation,
    p1: &OperatorMatrix,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::default();
    let mut upper = 0.0f64;
    let mut lower = 0.0f64;
    let mut transform = 0.0f64;
    for m in 0..2 {
        let a = lowering_symmetric(basis, m + 1, sd)?;
        let ad = a.transpose();
        let aad = a.try_mul(&ad)?;
        let ada = ad.try_mul(&a)?;
        let q_n = OperatorMatrix::diagonal_from(basis, |l| s.pow_re(l[m] as f64));
        let q_minus_n = OperatorMatrix::diagonal_from(basis, |l| s.pow_re(-(l[m] as f64)));
        let first = aad.try_sub(&ada.scaled(s.pow_re(-1.0)))?.try_sub(&q_n)?;
        let second = aad
            .try_sub(&ada.scaled(s.pow_re(1.0)))?
            .try_sub(&q_minus_n)?;
        upper = upper.max(projected(&first, p1)?);
        lower = lower.max(projected(&second, p1)?);

        let b = lowering_q_with(basis, m + 1, q)?;
        let q_half_n = OperatorMatrix::diagonal_from(basis, |l| s.pow_re(-(l[m] as f64) / 2.0));
        let mapped = b.try_mul(&q_half_n)?.scaled(s.pow_re(0.5));
        transform = transform.max(mapped.try_sub(&a)?.max_abs());
    }
    report.push(Check::new(
        "fock.symmetric_commutation_upper",
        "a a^dagger - q^-1 a^dagger a = q^N",
        upper,
        EXACT_TOLERANCE,
    ));
    report.push(Check::new(
        "fock.symmetric_commutation_lower",
        "a a^dagger - q a^dagger a = q^-N",
        lower,
        EXACT_TOLERANCE,
    ));
    report.push(Check::new(
        "fock.operator_transform",
        "q^(1/2) b q^(-N/2) = a with Q = q^2",
        transform,
        EXACT_TOLERANCE,
    ));
    Ok(report)
}

fn diagonal_residual(product: &OperatorMatrix, spec: &ModelSpec, basis: &FockBasis) -> Result<f64> {
    Ok(product.try_sub(&build_hamiltonian(spec, basis)?)?.max_abs())
}

/// Operator-product forms against bracket forms, coupling structure and
/// block diagonalization.
pub fn hamiltonian_checks(
    d: &DeformationParameter,
    n_max: u32,
    c: [f64; 2],
) -> Result<VerificationReport> {
    let (qd, sd) = paired(d)?;
    let t = qd.value();
    let basis = FockBasis::new(2, n_max)?;
    let mut report = VerificationReport::default();

    let q_coupled = ModelSpec::q_coupled(2, t, 1.0)?;
    report.push(Check::new(
        "hamiltonian.q_coupled_product_form",
        "b1^dagger b1 (Q^N2 + 1)/2 + (Q^N1 + 1)/2 b2^dagger b2 = [N1 + N2]_Q",
        diagonal_residual(
            &product_form_hamiltonian(&q_coupled, &basis)?,
            &q_coupled,
            &basis,
        )?,
        EXACT_TOLERANCE,
    ));
    let generalized = ModelSpec::q_generalized(t, c.to_vec(), 1.0)?;
    report.push(Check::new(
        "hamiltonian.generalized_product_form",
        "[X1](Q^X2 + 1)/2 + (Q^X1 + 1)/2 [X2] = [X1 + X2]_Q, X_i = N_i + c_i N_i^2",
        diagonal_residual(
            &product_form_hamiltonian(&generalized, &basis)?,
            &generalized,
            &basis,
        )?,
        EXACT_TOLERANCE,
    ));
    let symmetric = ModelSpec::symmetric_coupled(2, sd, 1.0)?;
    report.push(Check::new(
        "hamiltonian.symmetric_product_form",
        "a1^dagger a1 q^N2 + q^-N1 a2^dagger a2 = [N1 + N2]_q",
        diagonal_residual(
            &product_form_hamiltonian(&symmetric, &basis)?,
            &symmetric,
            &basis,
        )?,
        EXACT_TOLERANCE,
    ));

    let coupled = q_coupled.clone().with_couplings(vec![
        CouplingTerm {
            kind: CouplingKind::Bilinear,
            modes: [1, 2],
            strength: 0.1,
        },
        CouplingTerm {
            kind: CouplingKind::DarlingDennison,
            modes: [1, 2],
            strength: 0.05,
        },
    ])?;
    let h = build_hamiltonian(&coupled, &basis)?;
    report.push(Check::new(
        "hamiltonian.coupled_symmetric",
        "H = H^dagger with coupling terms",
        h.asymmetry(),
        EXACT_TOLERANCE,
    ));
    report.push(Check::new(
        "hamiltonian.polyad_conservation",
        "[H, N1 + N2] = 0 with coupling terms",
        commutator(&h, &total_number_operator(&basis))?.max_abs(),
        EXACT_TOLERANCE,
    ));

    let blocks = polyad_decompose(&h)?;
    let trace = blocks
        .iter()
        .map(|block| {
            let eig = jacobi_eigen(&block.matrix);
            (eig.values.iter().sum::<f64>() - block.matrix.trace()).abs()
        })
        .fold(0.0, f64::max);
    report.push(Check::new(
        "polyad.block_trace",
        "sum of block eigenvalues = block trace",
        trace,
        DEFAULT_TOLERANCE,
    ));

    let q = qd.as_q()?;
    let p1 = blocks
        .iter()
        .find(|b| b.polyad == 1)
        .expect("cutoff >= 1 has a P = 1 block");
    let eig = jacobi_eigen(&p1.matrix);
    let e = q.bracket(1.0);
    let split = 0.1 * (q.bracket(1.0) * q.bracket(1.0)).sqrt();
    report.push(Check::new(
        "polyad.two_level_closed_form",
        "P = 1 eigenvalues = e -+ lambda sqrt([1]_Q [1]_Q)",
        (eig.values[0] - (e - split))
            .abs()
            .max((eig.values[1] - (e + split)).abs()),
        EXACT_TOLERANCE,
    ));

    let raw = q_coupled.with_zero_point(ZeroPoint::Raw);
    let analytic = analytic_levels(&raw, &basis)?;
    let numeric = diagonalize(&build_hamiltonian(&raw, &basis)?)?;
    let agreement = analytic
        .iter()
        .map(|l| match numeric.energy_of(&l.assignment) {
            Some(e) => (e - l.energy).abs(),
            None => f64::INFINITY,
        })
        .fold(0.0, f64::max);
    report.push(Check::new(
        "hamiltonian.diagonalize_matches_closed_form",
        "diagonalized levels = closed-form levels",
        agreement,
        EXACT_TOLERANCE,
    ));
    Ok(report)
}

/// Runs every group of checks for one deformation.
pub fn verify_suite(
    d: &DeformationParameter,
    options: &SuiteOptions,
) -> Result<VerificationReport> {
    if options.n_max < options.margin.max(1) {
        return Err(Error::Argument(format!(
            "cutoff {} is below the margin {}",
            options.n_max, options.margin
        )));
    }
    let (qd, sd) = paired(d)?;
    let basis = FockBasis::new(2, options.n_max)?;
    let mut report = bracket_law_checks(d)?;
    report.extend(fock_checks(d, options.n_max)?);
    report.extend(verify_algebra(
        &basis,
        &qd,
        options.margin,
        DEFAULT_TOLERANCE,
    )?);
    report.extend(verify_algebra(
        &basis,
        &sd,
        options.margin,
        DEFAULT_TOLERANCE,
    )?);
    report.extend(hamiltonian_checks(d, options.n_max, options.c)?);
    Ok(match options.tolerance {
        Some(tol) => report.with_tolerance(tol),
        None => report,
    })
}
