//! Hamiltonian families, their level formulas, coupling terms and
//! polyad-blocked diagonalization.

mod eigen;
mod hamiltonian;
mod levels;
mod polyad;

pub use eigen::{jacobi_eigen, SymmetricEigen, JACOBI_MAX_SWEEPS};
pub use hamiltonian::{build_hamiltonian, coupling_element, product_form_hamiltonian};
pub use levels::{analytic_levels, model_levels, Level, LevelSpectrum};
pub use polyad::{diagonalize, polyad_decompose, PolyadBlock, BLOCK_LEAKAGE_TOLERANCE};

use serde::{Deserialize, Serialize};

use crate::deformation::{
    DeformationKind, DeformationParameter, QDeformation, SymmetricDeformation,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// Single symmetric q-oscillator, `E = (hw/2)([n]_q + [n+1]_q)`.
    #[serde(rename = "q_single")]
    SymmetricSingle,
    /// Single Q-oscillator, `E = (hw/2)([n]_Q + [n+1]_Q)`.
    #[serde(rename = "Q_single")]
    QSingle,
    /// Deformed anharmonic oscillator `[n + c n^2]_Q`.
    #[serde(rename = "Q_gen_single")]
    QAnharmonicSingle,
    /// su_q(l)-coupled symmetric oscillators, `[n_1 + ... + n_l]_q`.
    #[serde(rename = "q_coupled")]
    SymmetricCoupled,
    /// su_Q(l)-coupled Q-oscillators, `[n_1 + ... + n_l]_Q`.
    #[serde(rename = "Q_coupled")]
    QCoupled,
    /// Coupled deformed anharmonic oscillators, `[sum (n_i + c_i n_i^2)]_Q`.
    #[serde(rename = "Q_generalized")]
    QGeneralized,
    /// `sum w_i (v_i + d_i/2) + sum_{k >= i} x_ik (v_i + d_i/2)(v_k + d_k/2)`.
    #[serde(rename = "empirical_polyatomic")]
    EmpiricalPolyatomic,
    /// Two-mode Dunham-type form with `gamma_1`, `gamma_2`, `gamma_12`.
    #[serde(rename = "empirical_ABA")]
    EmpiricalTriatomic,
}

impl Family {
    pub fn deformation_kind(self) -> Option<DeformationKind> {
        use Family::*;
        match self {
            SymmetricSingle | SymmetricCoupled => Some(DeformationKind::SymmetricReal),
            QSingle | QAnharmonicSingle | QCoupled | QGeneralized => Some(DeformationKind::QReal),
            EmpiricalPolyatomic | EmpiricalTriatomic => None,
        }
    }

    pub fn is_empirical(self) -> bool {
        self.deformation_kind().is_none()
    }

    pub fn is_single(self) -> bool {
        matches!(
            self,
            Family::SymmetricSingle | Family::QSingle | Family::QAnharmonicSingle
        )
    }

    pub fn uses_c(self) -> bool {
        matches!(self, Family::QAnharmonicSingle | Family::QGeneralized)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    /// `b_i^dagger b_j + b_j^dagger b_i`
    Bilinear,
    /// `b_i^dagger b_i^dagger b_j b_j + b_j^dagger b_j^dagger b_i b_i`
    DarlingDennison,
}

/// Off-diagonal interaction `strength * (X_ij + X_ij^dagger)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingTerm {
    pub kind: CouplingKind,
    /// 1-based mode indices `(i, j)`, `i != j`.
    pub modes: [usize; 2],
    pub strength: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroPoint {
    Raw,
    #[default]
    GroundReferenced,
}

/// Constants of the empirical polynomial families.
///
/// `empirical_ABA` reads `omega`, `gamma` and `gamma_cross`; `empirical_polyatomic`
/// reads `omega`, `x` (entries with `k >= i`) and `degeneracy`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmpiricalParams {
    pub omega: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub gamma_cross: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub x: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degeneracy: Vec<u32>,
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: Family,
    pub modes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deformation: Option<DeformationParameter>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub c: Vec<f64>,
    /// Energy per bracket unit (hbar omega). Unused by the empirical families.
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empirical: Option<EmpiricalParams>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub couplings: Vec<CouplingTerm>,
    #[serde(default)]
    pub zero_point: ZeroPoint,
}

impl ModelSpec {
    fn base(family: Family, modes: usize, deformation: Option<DeformationParameter>) -> Self {
        ModelSpec {
            family,
            modes,
            deformation,
            c: Vec::new(),
            scale: 1.0,
            empirical: None,
            couplings: Vec::new(),
            zero_point: ZeroPoint::default(),
        }
    }

    /// `scale * [n_1 + ... + n_l]_Q`.
    pub fn q_coupled(modes: usize, t: f64, scale: f64) -> Result<Self> {
        let mut s = Self::base(
            Family::QCoupled,
            modes,
            Some(DeformationParameter::q_real(t)?),
        );
        s.scale = scale;
        s.validated()
    }

    /// `scale * [n_1 + ... + n_l]_q`.
    pub fn symmetric_coupled(modes: usize, d: DeformationParameter, scale: f64) -> Result<Self> {
        let mut s = Self::base(Family::SymmetricCoupled, modes, Some(d));
        s.scale = scale;
        s.validated()
    }

    /// `scale * [sum (n_i + c_i n_i^2)]_Q`.
    pub fn q_generalized(t: f64, c: Vec<f64>, scale: f64) -> Result<Self> {
        let mut s = Self::base(
            Family::QGeneralized,
            c.len(),
            Some(DeformationParameter::q_real(t)?),
        );
        s.c = c;
        s.scale = scale;
        s.validated()
    }

    pub fn single(
        family: Family,
        d: DeformationParameter,
        scale: f64,
        c: Option<f64>,
    ) -> Result<Self> {
        let mut s = Self::base(family, 1, Some(d));
        s.scale = scale;
        s.c = c.into_iter().collect();
        s.validated()
    }

    /// Two-mode empirical form with `(n + 1/2)` offsets.
    pub fn empirical_triatomic(omega: [f64; 2], gamma: [f64; 2], gamma_cross: f64) -> Result<Self> {
        let mut s = Self::base(Family::EmpiricalTriatomic, 2, None);
        s.empirical = Some(EmpiricalParams {
            omega: omega.to_vec(),
            gamma: gamma.to_vec(),
            gamma_cross,
            ..Default::default()
        });
        s.validated()
    }

    /// `x` is read on and above the diagonal only.
    pub fn empirical_polyatomic(
        omega: Vec<f64>,
        x: Vec<Vec<f64>>,
        degeneracy: Vec<u32>,
    ) -> Result<Self> {
        let mut s = Self::base(Family::EmpiricalPolyatomic, omega.len(), None);
        s.empirical = Some(EmpiricalParams {
            omega,
            x,
            degeneracy,
            ..Default::default()
        });
        s.validated()
    }

    pub fn with_couplings(mut self, couplings: Vec<CouplingTerm>) -> Result<Self> {
        self.couplings = couplings;
        self.validated()
    }

    pub fn with_zero_point(mut self, zero_point: ZeroPoint) -> Self {
        self.zero_point = zero_point;
        self
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Family/parameter consistency.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.modes == 0 {
            return bad("mode count must be positive".into());
        }
        if self.family.is_single() && self.modes != 1 {
            return bad(format!("family {:?} has exactly one mode", self.family));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return bad(format!("scale must be positive, got {}", self.scale));
        }
        match (self.family.deformation_kind(), self.deformation) {
            (Some(kind), Some(d)) => {
                let ok = if kind == DeformationKind::QReal {
                    d.kind() == DeformationKind::QReal
                } else {
                    d.kind().is_symmetric()
                };
                if !ok {
                    return bad(format!(
                        "family {:?} cannot use a {:?} deformation",
                        self.family,
                        d.kind()
                    ));
                }
            }
            (Some(_), None) => return bad(format!("family {:?} needs a deformation", self.family)),
            (None, Some(_)) => return bad("empirical families take no deformation".into()),
            (None, None) => {}
        }
        if self.family.uses_c() {
            if self.c.len() != self.modes {
                return bad(format!(
                    "expected {} anharmonicity coefficients c, got {}",
                    self.modes,
                    self.c.len()
                ));
            }
        } else if !self.c.is_empty() {
            return bad(format!("family {:?} takes no c coefficients", self.family));
        }
        if self.c.iter().any(|c| !c.is_finite()) {
            return bad("c coefficients must be finite".into());
        }
        self.validate_empirical()?;
        for (k, term) in self.couplings.iter().enumerate() {
            let [i, j] = term.modes;
            if i == j || i == 0 || j == 0 || i > self.modes || j > self.modes {
                return bad(format!(
                    "coupling {} has invalid modes ({i}, {j}) for {} modes",
                    k + 1,
                    self.modes
                ));
            }
            if !term.strength.is_finite() {
                return bad(format!("coupling {} strength is not finite", k + 1));
            }
        }
        Ok(())
    }

    fn validate_empirical(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        let Some(e) = &self.empirical else {
            if self.family.is_empirical() {
                return bad(format!(
                    "family {:?} needs empirical parameters",
                    self.family
                ));
            }
            return Ok(());
        };
        if !self.family.is_empirical() {
            return bad(format!(
                "family {:?} takes no empirical parameters",
                self.family
            ));
        }
        let all_finite = e
            .omega
            .iter()
            .chain(&e.gamma)
            .chain(e.x.iter().flatten())
            .chain(std::iter::once(&e.gamma_cross))
            .all(|v| v.is_finite());
        if !all_finite {
            return bad("empirical parameters must be finite".into());
        }
        if e.omega.len() != self.modes {
            return bad(format!(
                "expected {} frequencies, got {}",
                self.modes,
                e.omega.len()
            ));
        }
        match self.family {
            Family::EmpiricalTriatomic => {
                if self.modes != 2 {
                    return bad("empirical_ABA has exactly two modes".into());
                }
                if e.gamma.len() != 2 {
                    return bad("empirical_ABA needs two gamma values".into());
                }
                if !e.x.is_empty() || !e.degeneracy.is_empty() {
                    return bad("empirical_ABA takes no x or degeneracy".into());
                }
            }
            _ => {
                if !e.gamma.is_empty() || e.gamma_cross != 0.0 {
                    return bad("empirical_polyatomic uses x, not gamma".into());
                }
                if !e.x.is_empty()
                    && (e.x.len() != self.modes || e.x.iter().any(|r| r.len() != self.modes))
                {
                    return bad(format!("x must be a {0}x{0} matrix", self.modes));
                }
                if !e.degeneracy.is_empty() && e.degeneracy.len() != self.modes {
                    return bad(format!("expected {} degeneracies", self.modes));
                }
                if e.degeneracy.iter().any(|&d| d < 1) {
                    return bad("degeneracies must be >= 1".into());
                }
            }
        }
        Ok(())
    }

    pub(crate) fn q_deformation(&self) -> Result<QDeformation> {
        self.deformation
            .ok_or_else(|| Error::InvalidSpec("model has no deformation".into()))?
            .as_q()
    }

    pub(crate) fn symmetric_deformation(&self) -> Result<SymmetricDeformation> {
        self.deformation
            .ok_or_else(|| Error::InvalidSpec("model has no deformation".into()))?
            .as_symmetric()
    }

    /// Raw level energy of a diagonal family at one assignment (couplings ignored).
    pub fn diagonal_energy(&self, n: &[u32]) -> Result<f64> {
        if n.len() != self.modes {
            return Err(Error::Argument(format!(
                "assignment has {} quantum numbers, model has {} modes",
                n.len(),
                self.modes
            )));
        }
        let f = |k: usize| n[k] as f64;
        let total: f64 = (0..self.modes).map(f).sum();
        Ok(match self.family {
            Family::SymmetricSingle => {
                let s = self.symmetric_deformation()?;
                self.scale / 2.0 * (s.bracket(f(0)) + s.bracket(f(0) + 1.0))
            }
            Family::QSingle => {
                let q = self.q_deformation()?;
                self.scale / 2.0 * (q.bracket(f(0)) + q.bracket(f(0) + 1.0))
            }
            Family::SymmetricCoupled => self.scale * self.symmetric_deformation()?.bracket(total),
            Family::QCoupled => self.scale * self.q_deformation()?.bracket(total),
            Family::QAnharmonicSingle | Family::QGeneralized => {
                let arg: f64 = (0..self.modes)
                    .map(|k| f(k) + self.c[k] * f(k) * f(k))
                    .sum();
                self.scale * self.q_deformation()?.bracket(arg)
            }
            Family::EmpiricalTriatomic => {
                let e = self.empirical_params()?;
                let v = [f(0) + 0.5, f(1) + 0.5];
                e.omega[0] * v[0]
                    + e.omega[1] * v[1]
                    + e.gamma[0] / 2.0 * v[0] * v[0]
                    + e.gamma[1] / 2.0 * v[1] * v[1]
                    + e.gamma_cross * v[0] * v[1]
            }
            Family::EmpiricalPolyatomic => {
                let e = self.empirical_params()?;
                let shifted: Vec<f64> = (0..self.modes)
                    .map(|k| f(k) + e.degeneracy.get(k).copied().unwrap_or(1) as f64 / 2.0)
                    .collect();
                let mut energy: f64 = e.omega.iter().zip(&shifted).map(|(w, v)| w * v).sum();
                for (i, row) in e.x.iter().enumerate() {
                    for k in i..self.modes {
                        energy += row[k] * shifted[i] * shifted[k];
                    }
                }
                energy
            }
        })
    }

    fn empirical_params(&self) -> Result<&EmpiricalParams> {
        self.empirical
            .as_ref()
            .ok_or_else(|| Error::InvalidSpec("missing empirical parameters".into()))
    }

    fn slots(&self) -> Vec<(String, Slot)> {
        let l = self.modes;
        let mut slots = Vec::new();
        if self.family.is_empirical() {
            slots.extend((0..l).map(|i| (format!("omega{}", i + 1), Slot::Omega(i))));
            if self.family == Family::EmpiricalTriatomic {
                slots.push(("gamma1".into(), Slot::Gamma(0)));
                slots.push(("gamma2".into(), Slot::Gamma(1)));
                slots.push(("gamma12".into(), Slot::GammaCross));
            } else {
                let sep = if l >= 10 { "_" } else { "" };
                for i in 0..l {
                    for k in i..l {
                        slots.push((format!("x{}{sep}{}", i + 1, k + 1), Slot::X(i, k)));
                    }
                }
            }
        } else {
            slots.push(("scale".into(), Slot::Scale));
            slots.push((self.deformation_name().into(), Slot::Deformation));
            if self.family.uses_c() {
                slots.extend((0..l).map(|i| (format!("c{}", i + 1), Slot::C(i))));
            }
        }
        slots.extend(
            (0..self.couplings.len()).map(|k| (format!("lambda{}", k + 1), Slot::Lambda(k))),
        );
        slots
    }

    /// Names of every adjustable parameter, in a fixed order.
    pub fn parameter_names(&self) -> Vec<String> {
        self.slots().into_iter().map(|(name, _)| name).collect()
    }

    fn deformation_name(&self) -> &'static str {
        match self.family.deformation_kind() {
            Some(DeformationKind::QReal) => "T",
            _ => "tau",
        }
    }

    pub fn get_param(&self, name: &str) -> Result<f64> {
        self.param_slot(name).map(|slot| match slot {
            Slot::Scale => self.scale,
            Slot::Deformation => self.deformation.map_or(0.0, |d| d.value()),
            Slot::C(i) => self.c[i],
            Slot::Omega(i) => self.empirical.as_ref().map_or(0.0, |e| e.omega[i]),
            Slot::Gamma(i) => self.empirical.as_ref().map_or(0.0, |e| e.gamma[i]),
            Slot::GammaCross => self.empirical.as_ref().map_or(0.0, |e| e.gamma_cross),
            Slot::X(i, k) => self
                .empirical
                .as_ref()
                .and_then(|e| e.x.get(i).map(|r| r[k]))
                .unwrap_or(0.0),
            Slot::Lambda(k) => self.couplings[k].strength,
        })
    }

    /// Sets a parameter without validating the result.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = self.param_slot(name)?;
        let modes = self.modes;
        match slot {
            Slot::Scale => self.scale = value,
            Slot::Deformation => {
                let d = self
                    .deformation
                    .expect("slot exists only with a deformation");
                self.deformation = Some(d.with_value(value)?);
            }
            Slot::C(i) => self.c[i] = value,
            Slot::Lambda(k) => self.couplings[k].strength = value,
            other => {
                let e = self.empirical.get_or_insert_with(Default::default);
                match other {
                    Slot::Omega(i) => e.omega[i] = value,
                    Slot::Gamma(i) => e.gamma[i] = value,
                    Slot::GammaCross => e.gamma_cross = value,
                    Slot::X(i, k) => {
                        if e.x.is_empty() {
                            e.x = vec![vec![0.0; modes]; modes];
                        }
                        e.x[i][k] = value;
                    }
                    _ => unreachable!(),
                }
            }
        }
        Ok(())
    }

    fn param_slot(&self, name: &str) -> Result<Slot> {
        self.slots()
            .into_iter()
            .find_map(|(n, slot)| (n == name).then_some(slot))
            .ok_or_else(|| {
                Error::Argument(format!(
                    "unknown parameter '{name}' for family {:?}",
                    self.family
                ))
            })
    }
}

#[derive(Clone, Copy)]
enum Slot {
    Scale,
    Deformation,
    C(usize),
    Omega(usize),
    Gamma(usize),
    GammaCross,
    X(usize, usize),
    Lambda(usize),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_validate() {
        assert!(ModelSpec::q_coupled(2, 0.1, 1.0).is_ok());
        assert!(ModelSpec::q_coupled(2, 0.1, 0.0).is_err());
        assert!(ModelSpec::q_coupled(0, 0.1, 1.0).is_err());
        let d = DeformationParameter::q_real(0.1).unwrap();
        assert!(ModelSpec::symmetric_coupled(2, d, 1.0).is_err());
        assert!(ModelSpec::single(Family::QAnharmonicSingle, d, 1.0, None).is_err());
        assert!(ModelSpec::single(Family::QAnharmonicSingle, d, 1.0, Some(0.01)).is_ok());
        let bad_coupling = CouplingTerm {
            kind: CouplingKind::Bilinear,
            modes: [1, 1],
            strength: 0.1,
        };
        assert!(ModelSpec::q_coupled(2, 0.1, 1.0)
            .unwrap()
            .with_couplings(vec![bad_coupling])
            .is_err());
    }

    #[test]
    fn empirical_formulas() {
        let aba = ModelSpec::empirical_triatomic([1.0, 1.0], [0.0, 0.0], 0.0).unwrap();
        for n1 in 0..4 {
            for n2 in 0..4 {
                assert_eq!(
                    aba.diagonal_energy(&[n1, n2]).unwrap(),
                    (n1 + n2 + 1) as f64
                );
            }
        }
        let aba = ModelSpec::empirical_triatomic([1000.0, 1500.0], [-10.0, -6.0], -4.0).unwrap();
        let e = aba.diagonal_energy(&[1, 2]).unwrap();
        let expected = 1000.0 * 1.5 + 1500.0 * 2.5 - 5.0 * 2.25 - 3.0 * 6.25 - 4.0 * 1.5 * 2.5;
        assert!((e - expected).abs() < 1e-12);

        let poly = ModelSpec::empirical_polyatomic(
            vec![1.0, 2.0, 3.0],
            vec![
                vec![0.1, 0.2, 0.3],
                vec![9.9, 0.4, 0.5],
                vec![9.9, 9.9, 0.6],
            ],
            vec![1, 2, 1],
        )
        .unwrap();
        let v = [1.5, 1.0, 0.5];
        let mut expected = 1.0 * v[0] + 2.0 * v[1] + 3.0 * v[2];
        expected += 0.1 * v[0] * v[0] + 0.2 * v[0] * v[1] + 0.3 * v[0] * v[2];
        expected += 0.4 * v[1] * v[1] + 0.5 * v[1] * v[2] + 0.6 * v[2] * v[2];
        assert!((poly.diagonal_energy(&[1, 0, 0]).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn parameter_access() {
        let mut m = ModelSpec::q_generalized(0.05, vec![0.01, 0.02], 1000.0).unwrap();
        assert_eq!(m.parameter_names(), vec!["scale", "T", "c1", "c2"]);
        assert_eq!(m.get_param("c2").unwrap(), 0.02);
        m.set_param("T", 0.07).unwrap();
        assert_eq!(m.deformation.unwrap().value(), 0.07);
        assert!(m.get_param("gamma1").is_err());

        let poly = ModelSpec::empirical_polyatomic(vec![1.0; 3], vec![], vec![]).unwrap();
        let names = poly.parameter_names();
        assert_eq!(names[3..], ["x11", "x12", "x13", "x22", "x23", "x33"]);
        let mut poly = poly;
        poly.set_param("x23", 0.5).unwrap();
        assert_eq!(poly.get_param("x23").unwrap(), 0.5);
        assert_eq!(poly.get_param("x13").unwrap(), 0.0);
    }
}
