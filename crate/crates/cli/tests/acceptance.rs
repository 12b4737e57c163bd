//! Acceptance suite: thirteen numbered criteria, each printing one
//! PASS/FAIL line before asserting.
//!
//! Run with `cargo test -p qosc-cli --test acceptance -- --nocapture` to see
//! the report lines.

use std::process::Command;
use std::time::{Duration, Instant};

use qosc::algebra::{casimir_q, generators, CasimirForm, GeneratorTriple};
use qosc::analysis::{compare_spectra, effective_constants, quadratic_level_fit};
use qosc::deformation::{bracket_q, bracket_symmetric, DeformationParameter};
use qosc::fit::{fit, simulate_levels, FitOptions};
use qosc::fock::{
    commutator, lowering_q, lowering_symmetric, margin_projector, number_operator,
    total_number_operator, FockBasis, OperatorMatrix,
};
use qosc::models::{
    analytic_levels, build_hamiltonian, jacobi_eigen, model_levels, polyad_decompose,
    product_form_hamiltonian, CouplingKind, CouplingTerm, ModelSpec,
};
use qosc::series::{expand_model, SeriesPolynomial};

fn report(id: u32, name: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("acceptance {id:>2} [{verdict}] {name}: {detail}");
}

fn q_real(t: f64) -> DeformationParameter {
    DeformationParameter::q_real(t).unwrap()
}

fn sym_real(tau: f64) -> DeformationParameter {
    DeformationParameter::symmetric_real(tau).unwrap()
}

fn sym_phase(tau: f64) -> DeformationParameter {
    DeformationParameter::symmetric_phase(tau).unwrap()
}

/// `max |P (a - b) P|`.
fn projected_gap(a: &OperatorMatrix, b: &OperatorMatrix, p: &OperatorMatrix) -> f64 {
    a.try_sub(b).unwrap().project(p).unwrap().max_abs()
}

fn diag(basis: &FockBasis, f: impl FnMut(&[u32]) -> f64) -> OperatorMatrix {
    OperatorMatrix::diagonal_from(basis, f)
}

#[test]
fn criterion_01_bracket_laws() {
    let mut worst_add = 0.0f64;
    let mut worst_rec = 0.0f64;
    for t in [-0.2, -0.05, 0.05, 0.2] {
        let d = q_real(t);
        let br = |x: f64| bracket_q(x, &d).unwrap();
        for a in 0..=10 {
            for b in 0..=10 {
                let (a, b) = (a as f64, b as f64);
                let lhs = br(a + b);
                let rhs = br(a) + (t * a).exp() * br(b);
                worst_add = worst_add.max((lhs - rhs).abs() / lhs.abs().max(1.0));
            }
            let a = a as f64;
            let lhs = br(a + 1.0);
            let rhs = t.exp() * br(a) + 1.0;
            worst_rec = worst_rec.max((lhs - rhs).abs() / lhs.abs().max(1.0));
        }
    }
    let pass = worst_add <= 1e-12 && worst_rec <= 1e-12;
    report(
        1,
        "Q-bracket addition law and recurrence",
        pass,
        format!("addition {worst_add:.2e}, recurrence {worst_rec:.2e}, tol 1e-12 relative"),
    );
    assert!(pass);
}

#[test]
fn criterion_02_operator_transform() {
    // q = e^0.05 and Q = q^2
    let tau = 0.05;
    let basis = FockBasis::new(2, 10).unwrap();
    let sd = sym_real(tau);
    let qd = q_real(2.0 * tau);
    let mut worst = 0.0f64;
    for mode in 1..=2 {
        let b = lowering_q(&basis, mode, &qd).unwrap();
        let a = lowering_symmetric(&basis, mode, &sd).unwrap();
        let q_minus_half_n = diag(&basis, |l| (-tau * l[mode - 1] as f64 / 2.0).exp());
        let mapped = b
            .try_mul(&q_minus_half_n)
            .unwrap()
            .scaled((tau / 2.0).exp());
        worst = worst.max(mapped.try_sub(&a).unwrap().max_abs());
    }
    let pass = worst <= 1e-12;
    report(
        2,
        "q^(1/2) b q^(-N/2) = a entrywise",
        pass,
        format!("max entry gap {worst:.2e}, tol 1e-12, n_max 10"),
    );
    assert!(pass);
}

#[test]
fn criterion_03_boson_relations() {
    let tau: f64 = 0.05;
    let q = tau.exp();
    let big_q = q * q;
    let basis = FockBasis::new(2, 10).unwrap();
    let p1 = margin_projector(&basis, 1).unwrap();
    let id = OperatorMatrix::identity(&basis);
    let qd = q_real(2.0 * tau);
    let sd = sym_real(tau);
    let mut q_rel = 0.0f64;
    let mut sym_rel = 0.0f64;
    for mode in 1..=2 {
        let m = mode - 1;
        let b = lowering_q(&basis, mode, &qd).unwrap();
        let bd = b.transpose();
        let lhs = b.try_mul(&bd).unwrap();
        let rhs = bd.try_mul(&b).unwrap().scaled(big_q).try_add(&id).unwrap();
        q_rel = q_rel.max(projected_gap(&lhs, &rhs, &p1));

        let a = lowering_symmetric(&basis, mode, &sd).unwrap();
        let ad = a.transpose();
        let aad = a.try_mul(&ad).unwrap();
        let ada = ad.try_mul(&a).unwrap();
        let q_n = diag(&basis, |l| q.powf(l[m] as f64));
        let q_minus_n = diag(&basis, |l| q.powf(-(l[m] as f64)));
        let upper = ada.scaled(1.0 / q).try_add(&q_n).unwrap();
        let lower = ada.scaled(q).try_add(&q_minus_n).unwrap();
        sym_rel = sym_rel
            .max(projected_gap(&aad, &upper, &p1))
            .max(projected_gap(&aad, &lower, &p1));
        let n = number_operator(&basis, mode).unwrap();
        sym_rel = sym_rel
            .max(projected_gap(&commutator(&n, &ad).unwrap(), &ad, &p1))
            .max(projected_gap(
                &commutator(&n, &a).unwrap(),
                &a.scaled(-1.0),
                &p1,
            ));
    }
    let pass = q_rel <= 1e-12 && sym_rel <= 1e-12;
    report(
        3,
        "b b^dagger - Q b^dagger b - 1 = 0 and symmetric boson relations",
        pass,
        format!("Q-boson {q_rel:.2e}, q-boson {sym_rel:.2e}, tol 1e-12, margin 1, n_max 10"),
    );
    assert!(pass);
}

fn algebra_residual(g: &GeneratorTriple, p: &OperatorMatrix) -> f64 {
    let basis = g.basis();
    let d = g.deformation;
    let two_j0 = diag(basis, |l| {
        let x = l[0] as f64 - l[1] as f64;
        match d.kind() {
            qosc::deformation::DeformationKind::QReal => bracket_q(x, &d).unwrap(),
            _ => bracket_symmetric(x, &d).unwrap(),
        }
    });
    let raise = projected_gap(&commutator(&g.j0, &g.j_plus).unwrap(), &g.j_plus, p);
    let lower = projected_gap(
        &commutator(&g.j0, &g.j_minus).unwrap(),
        &g.j_minus.scaled(-1.0),
        p,
    );
    let closing_lhs = match d.kind() {
        qosc::deformation::DeformationKind::QReal => {
            let inv_q = (-d.value()).exp();
            g.j_plus
                .try_mul(&g.j_minus)
                .unwrap()
                .try_sub(&g.j_minus.try_mul(&g.j_plus).unwrap().scaled(inv_q))
                .unwrap()
        }
        _ => commutator(&g.j_plus, &g.j_minus).unwrap(),
    };
    let closing = projected_gap(&closing_lhs, &two_j0, p);
    raise.max(lower).max(closing)
}

#[test]
fn criterion_04_su2_commutation() {
    let basis = FockBasis::new(2, 10).unwrap();
    let p2 = margin_projector(&basis, 2).unwrap();
    let mut details = Vec::new();
    let mut pass = true;
    for (label, d) in [
        ("suQ(2) T=0.1", q_real(0.1)),
        ("suq(2) real tau=0.1", sym_real(0.1)),
        ("suq(2) phase tau=0.1", sym_phase(0.1)),
    ] {
        let g = generators(&basis, &d).unwrap();
        let r = algebra_residual(&g, &p2);
        pass &= r < 1e-10;
        details.push(format!("{label} {r:.2e}"));
    }
    report(
        4,
        "su_Q(2) and su_q(2) commutation relations",
        pass,
        format!("{}, tol 1e-10, margin 2, n_max 10", details.join(", ")),
    );
    assert!(pass);
}

#[test]
fn criterion_05_casimir() {
    let basis = FockBasis::new(2, 10).unwrap();
    let p2 = margin_projector(&basis, 2).unwrap();
    let d = q_real(0.1);
    let first = casimir_q(&basis, &d, CasimirForm::First).unwrap();
    let second = casimir_q(&basis, &d, CasimirForm::Second).unwrap();
    let closed = casimir_q(&basis, &d, CasimirForm::Closed).unwrap();
    let forms = projected_gap(&first, &second, &p2);
    let closed_gap = projected_gap(&first, &closed, &p2);

    // off-diagonal entries vanish and the diagonal depends on n1 + n2 only
    let kept: Vec<usize> = (0..basis.dimension())
        .filter(|&i| p2.entries()[(i, i)] == 1.0)
        .collect();
    let mut spread = 0.0f64;
    for &i in &kept {
        for &j in &kept {
            let (li, lj) = (basis.label(i), basis.label(j));
            let same_total = li[0] + li[1] == lj[0] + lj[1];
            let gap = if i == j {
                0.0
            } else if same_total {
                (first.entries()[(i, i)] - first.entries()[(j, j)]).abs()
            } else {
                0.0
            };
            let off = if i == j {
                0.0
            } else {
                first.entries()[(i, j)].abs()
            };
            spread = spread.max(gap).max(off);
        }
    }

    let undeformed = q_real(0.0);
    let c0 = casimir_q(&basis, &undeformed, CasimirForm::First).unwrap();
    let limit = kept
        .iter()
        .map(|&i| {
            let l = basis.label(i);
            let s = (l[0] + l[1]) as f64 / 2.0;
            (c0.entries()[(i, i)] - s * (s + 1.0)).abs()
        })
        .fold(0.0, f64::max);

    let pass = forms <= 1e-12 && closed_gap <= 1e-12 && spread <= 1e-12 && limit <= 1e-12;
    report(
        5,
        "Casimir forms agree, depend on n1 + n2 only, s(s+1) at T = 0",
        pass,
        format!(
            "first/second {forms:.2e}, first/closed {closed_gap:.2e}, spread {spread:.2e}, \
             T=0 limit {limit:.2e}, tol 1e-12"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_06_model_symmetry() {
    let basis = FockBasis::new(2, 10).unwrap();
    let p2 = margin_projector(&basis, 2).unwrap();
    let d = q_real(0.1);
    let g = generators(&basis, &d).unwrap();
    let h = diag(&basis, |l| bracket_q((l[0] + l[1]) as f64, &d).unwrap());
    let worst = [&g.j0, &g.j_plus, &g.j_minus]
        .iter()
        .map(|j| commutator(&h, j).unwrap().project(&p2).unwrap().max_abs())
        .fold(0.0, f64::max);
    let pass = worst < 1e-10;
    report(
        6,
        "[H, J0] = [H, J+-] = 0 for H = [N1 + N2]_Q",
        pass,
        format!("max residual {worst:.2e}, tol 1e-10, margin 2"),
    );
    assert!(pass);
}

#[test]
fn criterion_07_operator_forms() {
    let basis = FockBasis::new(2, 8).unwrap();
    let mut coupled_gap = 0.0f64;
    let mut generalized_gap = 0.0f64;
    for t in [-0.1, 0.05, 0.1, 0.2] {
        let d = q_real(t);
        let big_q = t.exp();
        // b1^dagger b1 (Q^N2 + 1)/2 + (Q^N1 + 1)/2 b2^dagger b2, built from operators
        let b1 = lowering_q(&basis, 1, &d).unwrap();
        let b2 = lowering_q(&basis, 2, &d).unwrap();
        let n1 = b1.transpose().try_mul(&b1).unwrap();
        let n2 = b2.transpose().try_mul(&b2).unwrap();
        let w1 = diag(&basis, |l| (big_q.powf(l[0] as f64) + 1.0) / 2.0);
        let w2 = diag(&basis, |l| (big_q.powf(l[1] as f64) + 1.0) / 2.0);
        let product = n1
            .try_mul(&w2)
            .unwrap()
            .try_add(&w1.try_mul(&n2).unwrap())
            .unwrap();
        let bracket = diag(&basis, |l| bracket_q((l[0] + l[1]) as f64, &d).unwrap());
        coupled_gap = coupled_gap.max(product.try_sub(&bracket).unwrap().max_abs());
        let spec = ModelSpec::q_coupled(2, t, 1.0).unwrap();
        coupled_gap = coupled_gap.max(
            product_form_hamiltonian(&spec, &basis)
                .unwrap()
                .try_sub(&build_hamiltonian(&spec, &basis).unwrap())
                .unwrap()
                .max_abs(),
        );

        for c in [[0.02, 0.05], [0.0, 0.03], [-0.01, 0.04]] {
            let x = |l: &[u32], i: usize| l[i] as f64 + c[i] * (l[i] as f64).powi(2);
            let first = diag(&basis, |l| {
                let (x1, x2) = (x(l, 0), x(l, 1));
                bracket_q(x1, &d).unwrap() * (big_q.powf(x2) + 1.0) / 2.0
                    + (big_q.powf(x1) + 1.0) / 2.0 * bracket_q(x2, &d).unwrap()
            });
            let second = diag(&basis, |l| bracket_q(x(l, 0) + x(l, 1), &d).unwrap());
            generalized_gap = generalized_gap.max(first.try_sub(&second).unwrap().max_abs());
            let spec = ModelSpec::q_generalized(t, c.to_vec(), 1.0).unwrap();
            generalized_gap = generalized_gap.max(
                product_form_hamiltonian(&spec, &basis)
                    .unwrap()
                    .try_sub(&build_hamiltonian(&spec, &basis).unwrap())
                    .unwrap()
                    .max_abs(),
            );
        }
    }
    let pass = coupled_gap <= 1e-12 && generalized_gap <= 1e-12;
    report(
        7,
        "operator-product forms equal bracket forms",
        pass,
        format!(
            "coupled {coupled_gap:.2e}, generalized (c1 != c2) {generalized_gap:.2e}, \
             tol 1e-12, n_max 8"
        ),
    );
    assert!(pass);
}

/// Exact coefficient of `symbol^power * prod c^c_exps` in front of the monomial `n`.
fn coef(series: &SeriesPolynomial, n: &[u32], power: u32, c_exps: &[u32]) -> String {
    series
        .coefficient(n)
        .map(|c| c.term(power, c_exps).to_string())
        .unwrap_or_else(|| "0".into())
}

#[test]
fn criterion_08_expansion_coefficients() {
    let mut mismatches: Vec<String> = Vec::new();
    let mut expect = |what: &str, got: String, want: &str| {
        if got != want {
            mismatches.push(format!("{what}: got {got}, want {want}"));
        }
    };

    // [n1 + n2]_Q to order T
    let q2 = expand_model(&ModelSpec::q_coupled(2, 0.1, 1.0).unwrap(), 1).unwrap();
    for (n, p, want) in [
        ([1, 0], 0, "1"),
        ([1, 0], 1, "-1/2"),
        ([0, 1], 1, "-1/2"),
        ([2, 0], 1, "1/2"),
        ([0, 2], 1, "1/2"),
        ([1, 1], 1, "1"),
    ] {
        expect(
            &format!("Q_coupled {n:?} T^{p}"),
            coef(&q2, &n, p, &[]),
            want,
        );
    }
    expect("Q_coupled term count", q2.terms().len().to_string(), "5");

    // [n1 + n2]_q to order tau^2, both kinds
    for (kind, d, sign) in [("phase", sym_phase(0.1), ""), ("real", sym_real(0.1), "-")] {
        let flip = if sign.is_empty() { "-" } else { "" };
        let s = expand_model(&ModelSpec::symmetric_coupled(2, d, 1.0).unwrap(), 1).unwrap();
        expect(&format!("{kind} n1 tau^0"), coef(&s, &[1, 0], 0, &[]), "1");
        expect(
            &format!("{kind} n1 tau^2"),
            coef(&s, &[1, 0], 2, &[]),
            &format!("{sign}1/6"),
        );
        expect(
            &format!("{kind} n1^3 tau^2"),
            coef(&s, &[3, 0], 2, &[]),
            &format!("{flip}1/6"),
        );
        expect(
            &format!("{kind} n1^2 n2 tau^2"),
            coef(&s, &[2, 1], 2, &[]),
            &format!("{flip}1/2"),
        );
        expect(
            &format!("{kind} n1 n2^2 tau^2"),
            coef(&s, &[1, 2], 2, &[]),
            &format!("{flip}1/2"),
        );
        expect(
            &format!("{kind} n1 n2 absent"),
            s.coefficient(&[1, 1]).is_none().to_string(),
            "true",
        );
    }

    // three modes: every pair carries the same T coefficient
    let q3 = expand_model(&ModelSpec::q_coupled(3, 0.1, 1.0).unwrap(), 1).unwrap();
    for n in [[1, 1, 0], [1, 0, 1], [0, 1, 1]] {
        expect(&format!("l=3 {n:?} T"), coef(&q3, &n, 1, &[]), "1");
    }
    for n in [[2, 0, 0], [0, 2, 0], [0, 0, 2]] {
        expect(&format!("l=3 {n:?} T"), coef(&q3, &n, 1, &[]), "1/2");
    }

    // [sum (n_i + c_i n_i^2)]_Q to order T, c kept symbolic
    let g = expand_model(
        &ModelSpec::q_generalized(0.1, vec![0.02, 0.05], 1.0).unwrap(),
        1,
    )
    .unwrap();
    let rows: [([u32; 2], u32, [u32; 2], &str); 16] = [
        ([1, 0], 0, [0, 0], "1"),
        ([1, 0], 1, [0, 0], "-1/2"),
        ([2, 0], 0, [1, 0], "1"),
        ([2, 0], 1, [0, 0], "1/2"),
        ([2, 0], 1, [1, 0], "-1/2"),
        ([0, 2], 0, [0, 1], "1"),
        ([0, 2], 1, [0, 1], "-1/2"),
        ([1, 1], 1, [0, 0], "1"),
        ([3, 0], 1, [1, 0], "1"),
        ([0, 3], 1, [0, 1], "1"),
        ([1, 2], 1, [0, 1], "1"),
        ([2, 1], 1, [1, 0], "1"),
        ([4, 0], 1, [2, 0], "1/2"),
        ([0, 4], 1, [0, 2], "1/2"),
        ([2, 2], 1, [1, 1], "1"),
        ([2, 0], 0, [0, 0], "0"),
    ];
    for (n, p, c, want) in rows {
        expect(
            &format!("generalized {n:?} T^{p} c^{c:?}"),
            coef(&g, &n, p, &c),
            want,
        );
    }
    let monomials: usize = g.terms().iter().map(|(_, c)| c.len()).sum();
    expect("generalized monomial count", monomials.to_string(), "18");

    let pass = mismatches.is_empty();
    report(
        8,
        "exact expansion coefficients",
        pass,
        if pass {
            "all coefficients equal, zero tolerance".into()
        } else {
            mismatches.join("; ")
        },
    );
    assert!(pass, "{mismatches:?}");
}

fn morse_residual(t: f64) -> f64 {
    let spec = ModelSpec::q_coupled(2, t, 1.0).unwrap();
    let empirical = effective_constants(&spec)
        .unwrap()
        .to_empirical_triatomic()
        .unwrap();
    let basis = FockBasis::new(2, 3).unwrap();
    let exact = model_levels(&spec, &basis).unwrap().within_polyad(3);
    let mapped = model_levels(&empirical, &basis).unwrap().within_polyad(3);
    compare_spectra(&exact, &mapped).unwrap().max_abs
}

#[test]
fn criterion_09_morse_equivalence() {
    let coarse = morse_residual(0.01);
    let fine = morse_residual(0.001);
    let ratio = coarse / fine;
    let pass = coarse < 1e-3 && (90.0..=110.0).contains(&ratio);
    report(
        9,
        "exact Q_coupled levels vs mapped empirical levels",
        pass,
        format!(
            "max_abs {coarse:.3e} at T=0.01 (bound 1e-3), {fine:.3e} at T=0.001, \
             ratio {ratio:.1}, total quanta <= 3"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_anharmonicity_ratio() {
    let t = 0.01;
    let spec = ModelSpec::q_coupled(1, t, 1.0).unwrap();
    let levels = analytic_levels(&spec, &FockBasis::new(1, 10).unwrap()).unwrap();
    let (_, linear, quadratic) = quadratic_level_fit(&levels).unwrap();
    let ratio = quadratic / linear;
    let want = (t / 2.0) / (1.0 - t / 2.0);
    let gap = (ratio - want).abs();
    let pass = gap <= 5e-4;
    report(
        10,
        "quadratic/linear ratio of single-oscillator levels",
        pass,
        format!("ratio {ratio:.6e} vs (T/2)/(1-T/2) = {want:.6e}, gap {gap:.2e}, tol 5e-4"),
    );
    assert!(pass);
}

#[test]
fn criterion_11_coupling_structure() {
    let t = 0.1;
    let lambda = 0.1;
    let basis = FockBasis::new(2, 3).unwrap();
    let couplings = vec![
        CouplingTerm {
            kind: CouplingKind::Bilinear,
            modes: [1, 2],
            strength: lambda,
        },
        CouplingTerm {
            kind: CouplingKind::DarlingDennison,
            modes: [1, 2],
            strength: 0.05,
        },
    ];
    let spec = ModelSpec::q_coupled(2, t, 1.0)
        .unwrap()
        .with_couplings(couplings.clone())
        .unwrap();
    let h = build_hamiltonian(&spec, &basis).unwrap();
    let n = total_number_operator(&basis);
    let leak = commutator(&h, &n).unwrap().max_abs();
    let dd_only = ModelSpec::q_coupled(2, t, 1.0)
        .unwrap()
        .with_couplings(vec![couplings[1]])
        .unwrap();
    let dd_leak = commutator(&build_hamiltonian(&dd_only, &basis).unwrap(), &n)
        .unwrap()
        .max_abs();

    let blocks = polyad_decompose(&h).unwrap();
    let sizes: Vec<usize> = blocks.iter().map(|b| b.labels.len()).collect();

    let bilinear = ModelSpec::q_coupled(2, t, 1.0)
        .unwrap()
        .with_couplings(vec![couplings[0]])
        .unwrap();
    let blocks = polyad_decompose(&build_hamiltonian(&bilinear, &basis).unwrap()).unwrap();
    let p1 = blocks.iter().find(|b| b.polyad == 1).unwrap();
    let eig = jacobi_eigen(&p1.matrix);
    let d = q_real(t);
    let one = bracket_q(1.0, &d).unwrap();
    let e = one;
    let split = lambda * (one * one).sqrt();
    let gap = (eig.values[0] - (e - split))
        .abs()
        .max((eig.values[1] - (e + split)).abs());

    let pass = leak == 0.0 && dd_leak == 0.0 && sizes == [1, 2, 3, 4, 3, 2, 1] && gap <= 1e-12;
    report(
        11,
        "couplings conserve total quanta; polyad blocks; two-level closed form",
        pass,
        format!(
            "[H, N] max {leak:e} (Darling-Dennison alone {dd_leak:e}), block sizes {sizes:?}, \
             P=1 eigenvalue gap {gap:.2e} (tol 1e-12)"
        ),
    );
    assert!(pass);
}

struct RoundTrip {
    worst_relative: f64,
    iterations: usize,
    elapsed: Duration,
    converged: bool,
}

fn round_trip(truth: &ModelSpec, template: &ModelSpec, names: &[&str]) -> RoundTrip {
    let levels = simulate_levels(truth, 4, 0.0, 0).unwrap();
    let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    let start = Instant::now();
    let r = fit(&levels, template, &names, None, &FitOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let worst_relative = names
        .iter()
        .map(|n| {
            let want = truth.get_param(n).unwrap();
            (r.param(n).unwrap() - want).abs() / want.abs()
        })
        .fold(0.0, f64::max);
    RoundTrip {
        worst_relative,
        iterations: r.iterations,
        elapsed,
        converged: r.converged,
    }
}

#[test]
fn criterion_12_fit_round_trips() {
    let coupled = round_trip(
        &ModelSpec::q_coupled(2, 0.05, 1000.0).unwrap(),
        &ModelSpec::q_coupled(2, 0.0, 1.0).unwrap(),
        &["scale", "T"],
    );
    let generalized = round_trip(
        &ModelSpec::q_generalized(0.04, vec![0.01, 0.03], 1500.0).unwrap(),
        &ModelSpec::q_generalized(0.0, vec![0.0, 0.0], 1.0).unwrap(),
        &["scale", "T", "c1", "c2"],
    );
    let ok = |r: &RoundTrip| {
        r.converged
            && r.worst_relative <= 1e-6
            && r.iterations <= 500
            && r.elapsed <= Duration::from_secs(10)
    };
    let pass = ok(&coupled) && ok(&generalized);
    let line = |label: &str, r: &RoundTrip| {
        format!(
            "{label} rel {:.2e} in {} iterations, {:.3} s",
            r.worst_relative,
            r.iterations,
            r.elapsed.as_secs_f64()
        )
    };
    report(
        12,
        "noiseless fit round trips",
        pass,
        format!(
            "{}; {}; tol 1e-6, <= 500 iterations, <= 10 s",
            line("Q_coupled (scale, T)", &coupled),
            line("Q_generalized (scale, T, c1, c2)", &generalized)
        ),
    );
    assert!(pass);
}

fn run_qosc(args: &[&str]) -> (Option<i32>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_qosc"))
        .args(args)
        .output()
        .expect("binary runs");
    (out.status.code(), out.stdout)
}

#[test]
fn criterion_13_cli_determinism() {
    let dir = tempfile::TempDir::new().unwrap();
    let spectrum_cfg = dir.path().join("spectrum.json");
    std::fs::write(
        &spectrum_cfg,
        r#"{"model": {"family": "Q_coupled", "modes": 2, "deformation": {"kind": "Q_real", "value": 0.1},
                      "couplings": [{"kind": "bilinear", "modes": [1, 2], "strength": 0.1}]},
            "basis": {"modes": 2, "n_max": 4}}"#,
    )
    .unwrap();
    let verify_cfg = dir.path().join("verify.json");
    std::fs::write(
        &verify_cfg,
        r#"{"model": {"family": "Q_coupled", "modes": 2, "deformation": {"kind": "Q_real", "value": 0.1}},
            "basis": {"modes": 2, "n_max": 8},
            "task": {"margin": 2}}"#,
    )
    .unwrap();
    let spectrum_cfg = spectrum_cfg.to_str().unwrap();
    let verify_cfg = verify_cfg.to_str().unwrap();

    let s1 = run_qosc(&["spectrum", "--config", spectrum_cfg]);
    let s2 = run_qosc(&["spectrum", "--config", spectrum_cfg]);
    let j1 = run_qosc(&["spectrum", "--config", spectrum_cfg, "--format", "json"]);
    let j2 = run_qosc(&["spectrum", "--config", spectrum_cfg, "--format", "json"]);
    let v1 = run_qosc(&["verify", "--config", verify_cfg]);
    let v2 = run_qosc(&["verify", "--config", verify_cfg]);

    let identical = s1 == s2 && j1 == j2 && v1 == v2;
    let nonempty = !s1.1.is_empty() && !v1.1.is_empty();
    let pass = identical && nonempty && s1.0 == Some(0) && v1.0 == Some(0);
    report(
        13,
        "CLI outputs are byte-identical across runs; default verify exits 0",
        pass,
        format!(
            "spectrum {} bytes, verify {} bytes, identical {identical}, verify exit {:?}",
            s1.1.len(),
            v1.1.len(),
            v1.0
        ),
    );
    assert!(pass);
}
