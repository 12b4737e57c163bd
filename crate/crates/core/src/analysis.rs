//! Spectroscopic constants, anharmonicity relations and spectrum comparison.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::deformation::DeformationKind;
use crate::error::{Error, Result};
use crate::models::{LevelSpectrum, ModelSpec};
use crate::series::{expand_model, Coefficient, SeriesPolynomial};

/// Ratio of the quadratic to the linear coefficient of a deformed anharmonic
/// oscillator: `c + (T/2)/(1 - T/2)`.
pub fn self_anharmonicity(t: f64, c: f64) -> Result<f64> {
    if !t.is_finite() || !c.is_finite() {
        return Err(Error::Domain(
            "self-anharmonicity needs finite T and c".into(),
        ));
    }
    if t == 2.0 {
        return Err(Error::Domain(
            "self-anharmonicity has a pole at T = 2".into(),
        ));
    }
    Ok(c + (t / 2.0) / (1.0 - t / 2.0))
}

fn unit(modes: usize, i: usize, k: u32) -> Vec<u32> {
    let mut e = vec![0; modes];
    e[i] = k;
    e
}

fn pair(modes: usize, i: usize, j: usize) -> Vec<u32> {
    let mut e = vec![0; modes];
    e[i] = 1;
    e[j] = 1;
    e
}

/// First-order constants of a Q-family model in both level conventions.
///
/// `linear`, `quadratic` and `cross` are the coefficients of `n_i`, `n_i^2`
/// and `n_i n_j` in the order-`T` expansion. `omega`, `gamma` and
/// `gamma_cross` are the same polynomial rewritten in `v_i = n_i + 1/2`:
/// `sum omega_i v_i + sum gamma_i/2 v_i^2 + sum_{i<j} gamma_ij v_i v_j`,
/// up to a constant. Terms beyond quadratic order are not represented.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveConstants {
    pub linear: Vec<f64>,
    pub quadratic: Vec<f64>,
    /// Symmetric with zero diagonal.
    pub cross: Vec<Vec<f64>>,
    pub omega: Vec<f64>,
    pub gamma: Vec<f64>,
    pub gamma_cross: Vec<Vec<f64>>,
}

impl EffectiveConstants {
    /// Two-mode empirical model with these constants.
    pub fn to_empirical_triatomic(&self) -> Result<ModelSpec> {
        if self.omega.len() != 2 {
            return Err(Error::Argument(
                "the two-mode empirical form needs exactly two modes".into(),
            ));
        }
        ModelSpec::empirical_triatomic(
            [self.omega[0], self.omega[1]],
            [self.gamma[0], self.gamma[1]],
            self.gamma_cross[0][1],
        )
    }

    /// Polyatomic empirical model with unit degeneracies: `x_ii = gamma_i/2`,
    /// `x_ik = gamma_ik` above the diagonal.
    pub fn to_empirical_polyatomic(&self) -> Result<ModelSpec> {
        let l = self.omega.len();
        let x = (0..l)
            .map(|i| {
                (0..l)
                    .map(|k| match k.cmp(&i) {
                        std::cmp::Ordering::Less => 0.0,
                        std::cmp::Ordering::Equal => self.gamma[i] / 2.0,
                        std::cmp::Ordering::Greater => self.gamma_cross[i][k],
                    })
                    .collect()
            })
            .collect();
        ModelSpec::empirical_polyatomic(self.omega.clone(), x, vec![1; l])
    }
}

/// Reads the order-`T` constants of a diagonal Q-family model with at least
/// two modes.
pub fn effective_constants(spec: &ModelSpec) -> Result<EffectiveConstants> {
    match spec.family.deformation_kind() {
        Some(DeformationKind::QReal) => {}
        Some(_) => {
            return Err(Error::Unsupported(
                "symmetric q-coupled models have no n_i n_j term at lowest order, \
                 so no quadratic cross-anharmonicity can be read off"
                    .into(),
            ))
        }
        None => {
            return Err(Error::Unsupported(
                "empirical models already carry their constants".into(),
            ))
        }
    }
    let l = spec.modes;
    if l < 2 {
        return Err(Error::Argument(
            "effective constants need at least two modes".into(),
        ));
    }
    let series = expand_model(spec, 1)?;
    let linear: Vec<f64> = (0..l)
        .map(|i| series.coefficient_value(&unit(l, i, 1)))
        .collect();
    let quadratic: Vec<f64> = (0..l)
        .map(|i| series.coefficient_value(&unit(l, i, 2)))
        .collect();
    let cross: Vec<Vec<f64>> = (0..l)
        .map(|i| {
            (0..l)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        series.coefficient_value(&pair(l, i, j))
                    }
                })
                .collect()
        })
        .collect();
    let omega = (0..l)
        .map(|i| linear[i] - quadratic[i] - cross[i].iter().sum::<f64>() / 2.0)
        .collect();
    let gamma = quadratic.iter().map(|a| 2.0 * a).collect();
    Ok(EffectiveConstants {
        linear,
        quadratic,
        gamma_cross: cross.clone(),
        cross,
        omega,
        gamma,
    })
}

/// Leading cross-mode structure of a two-mode diagonal model.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossAnharmonicity {
    /// Order of the expansion inspected (`T^1` or `tau^2`).
    pub series: SeriesPolynomial,
    /// Coefficient of `n1 n2`; `None` when it vanishes identically.
    pub bilinear: Option<Coefficient>,
    /// Every monomial containing both quantum numbers, in canonical order.
    pub cross_terms: Vec<(Vec<u32>, Coefficient)>,
}

/// Inspects the lowest nontrivial order (`T` for Q families, `tau^2` for
/// symmetric families) for the coupling between the two modes.
pub fn cross_anharmonicity_report(spec: &ModelSpec) -> Result<CrossAnharmonicity> {
    if spec.modes != 2 {
        return Err(Error::Argument(
            "the cross-anharmonicity report is defined for two modes".into(),
        ));
    }
    let series = expand_model(spec, 1)?;
    let bilinear = series.coefficient(&[1, 1]).cloned();
    let cross_terms = series
        .terms()
        .into_iter()
        .filter(|(e, _)| e.iter().all(|&k| k > 0))
        .map(|(e, c)| (e.clone(), c.clone()))
        .collect();
    Ok(CrossAnharmonicity {
        series,
        bilinear,
        cross_terms,
    })
}

/// Ground-referenced residuals `a - b` keyed by assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumComparison {
    pub max_abs: f64,
    pub rms: f64,
    pub residuals: BTreeMap<Vec<u32>, f64>,
}

/// Compares two spectra over the same assignment set, each measured from
/// its own ground level.
pub fn compare_spectra(a: &LevelSpectrum, b: &LevelSpectrum) -> Result<SpectrumComparison> {
    let ea = a.ground_referenced().by_assignment();
    let eb = b.ground_referenced().by_assignment();
    if ea.len() != eb.len() || ea.keys().any(|k| !eb.contains_key(k)) {
        let missing = ea
            .keys()
            .find(|k| !eb.contains_key(*k))
            .or_else(|| eb.keys().find(|k| !ea.contains_key(*k)));
        return Err(Error::Argument(format!(
            "spectra have different assignment sets (first unmatched: {missing:?})"
        )));
    }
    let residuals: BTreeMap<Vec<u32>, f64> =
        ea.iter().map(|(k, va)| (k.clone(), va - eb[k])).collect();
    let max_abs = residuals.values().fold(0.0f64, |m, r| m.max(r.abs()));
    let rms = if residuals.is_empty() {
        0.0
    } else {
        (residuals.values().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt()
    };
    Ok(SpectrumComparison {
        max_abs,
        rms,
        residuals,
    })
}

/// Least-squares fit `E(n) = e0 + linear n + quadratic n^2` of a one-mode
/// spectrum, returning `(e0, linear, quadratic)`.
pub fn quadratic_level_fit(levels: &LevelSpectrum) -> Result<(f64, f64, f64)> {
    if levels.modes() != Some(1) {
        return Err(Error::Argument(
            "quadratic level fit needs a one-mode spectrum".into(),
        ));
    }
    if levels.len() < 3 {
        return Err(Error::Underdetermined {
            levels: levels.len(),
            params: 3,
        });
    }
    let rows = levels.len();
    let design = DMatrix::from_fn(rows, 3, |r, c| {
        (levels.levels()[r].assignment[0] as f64).powi(c as i32)
    });
    let rhs = DVector::from_iterator(rows, levels.iter().map(|l| l.energy));
    let solution = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Domain(format!("quadratic fit failed: {e}")))?;
    Ok((solution[0], solution[1], solution[2]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockBasis;
    use crate::models::{analytic_levels, Family, Level};

    #[test]
    fn self_anharmonicity_values() {
        assert_eq!(self_anharmonicity(0.0, 0.0).unwrap(), 0.0);
        assert!((self_anharmonicity(0.1, 0.0).unwrap() - 0.052_631_578_947_368_42).abs() < 1e-16);
        assert!((self_anharmonicity(0.02, 0.01).unwrap() - 0.020_101_010_101_010_1).abs() < 1e-15);
        assert!(self_anharmonicity(2.0, 0.0).is_err());
    }

    #[test]
    fn q_coupled_constants() {
        let spec = ModelSpec::q_coupled(2, 0.1, 1.0).unwrap();
        let k = effective_constants(&spec).unwrap();
        for i in 0..2 {
            assert!((k.gamma[i] - 0.1).abs() < 1e-15);
            assert!((k.omega[i] - (0.95 - 0.05 - 0.05)).abs() < 1e-15);
        }
        assert!((k.gamma_cross[0][1] - 0.1).abs() < 1e-15);

        let flat = effective_constants(&ModelSpec::q_coupled(2, 0.0, 3.0).unwrap()).unwrap();
        assert_eq!(flat.gamma, vec![0.0, 0.0]);
        assert_eq!(flat.omega, vec![3.0, 3.0]);
    }

    #[test]
    fn generalized_ratio_matches_self_anharmonicity() {
        let spec = ModelSpec::q_generalized(0.04, vec![0.01, 0.03], 1.0).unwrap();
        let k = effective_constants(&spec).unwrap();
        assert!(k.gamma[0] != k.gamma[1]);
        for (i, c) in [0.01, 0.03].into_iter().enumerate() {
            let ratio = k.quadratic[i] / k.linear[i];
            assert!((ratio - self_anharmonicity(0.04, c).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn empirical_mapping_reproduces_first_order_polynomial() {
        let spec = ModelSpec::q_coupled(2, 0.03, 2.0).unwrap();
        let k = effective_constants(&spec).unwrap();
        let series = expand_model(&spec, 1).unwrap();
        let basis = FockBasis::new(2, 4).unwrap();
        for model in [
            k.to_empirical_triatomic().unwrap(),
            k.to_empirical_polyatomic().unwrap(),
        ] {
            let emp = analytic_levels(&model, &basis).unwrap();
            for level in emp.iter() {
                assert!((level.energy - series.evaluate(&level.assignment)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn q_kinds_rejected() {
        let d = crate::deformation::DeformationParameter::symmetric_real(0.1).unwrap();
        let spec = ModelSpec::symmetric_coupled(2, d, 1.0).unwrap();
        assert!(matches!(
            effective_constants(&spec),
            Err(Error::Unsupported(_))
        ));
        let report = cross_anharmonicity_report(&spec).unwrap();
        assert!(report.bilinear.is_none());
        assert_eq!(report.cross_terms.len(), 2);
    }

    #[test]
    fn comparison() {
        let spec = ModelSpec::q_coupled(2, 0.1, 1.0).unwrap();
        let basis = FockBasis::new(2, 3).unwrap();
        let levels = analytic_levels(&spec, &basis).unwrap();
        let same = compare_spectra(&levels, &levels).unwrap();
        assert_eq!(same.max_abs, 0.0);
        assert_eq!(same.residuals.len(), 16);
        let offset = compare_spectra(&levels, &levels.shifted(5.0)).unwrap();
        assert!(offset.max_abs < 1e-14);
        let fewer = analytic_levels(&spec, &FockBasis::new(2, 2).unwrap()).unwrap();
        assert!(compare_spectra(&levels, &fewer).is_err());
    }

    #[test]
    fn quadratic_fit_exact_on_polynomial() {
        let levels = LevelSpectrum::new(
            (0..6)
                .map(|n| Level::new(vec![n], 1.0 + 2.0 * n as f64 - 0.1 * (n * n) as f64))
                .collect(),
        )
        .unwrap();
        let (e0, a, b) = quadratic_level_fit(&levels).unwrap();
        assert!((e0 - 1.0).abs() < 1e-12 && (a - 2.0).abs() < 1e-12 && (b + 0.1).abs() < 1e-12);
        let spec = ModelSpec::single(
            Family::QSingle,
            crate::deformation::DeformationParameter::q_real(0.1).unwrap(),
            1.0,
            None,
        )
        .unwrap();
        let two = analytic_levels(&spec, &FockBasis::new(1, 1).unwrap()).unwrap();
        assert!(matches!(
            quadratic_level_fit(&two),
            Err(Error::Underdetermined { .. })
        ));
    }
}
