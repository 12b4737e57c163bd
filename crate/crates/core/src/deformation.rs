//! Deformed numbers.
//!
//! Two families of deformed integers appear throughout the crate:
//!
//! * the symmetric q-number `[x]_q = (q^x - q^-x) / (q - q^-1)` with either
//!   `q = e^tau` (real) or `q = e^(i tau)` (phase), and
//! * the Q-number `[x]_Q = (Q^x - 1) / (Q - 1)` with `Q = e^T`.
//!
//! Both reduce to `x` in the undeformed limit. Below [`SMALL_DEFORMATION`] the
//! closed forms are replaced by their three-term series so that every bracket
//! is continuous through zero deformation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this magnitude of `tau` or `T` brackets are evaluated by series.
pub const SMALL_DEFORMATION: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DeformationKind {
    /// `q = e^tau`, tau real.
    #[serde(rename = "q_real")]
    SymmetricReal,
    /// `q = e^(i tau)`, tau real.
    #[serde(rename = "q_phase")]
    SymmetricPhase,
    /// `Q = e^T`, T real.
    #[serde(rename = "Q_real")]
    QReal,
}

impl DeformationKind {
    pub fn is_symmetric(self) -> bool {
        !matches!(self, DeformationKind::QReal)
    }

    /// Sign in front of the `tau^2` correction of the symmetric bracket
    /// series: `+` for a phase, `-` for real q.
    ///
    /// This is the only place the convention is encoded.
    pub fn tau2_sign(self) -> i32 {
        match self {
            DeformationKind::SymmetricPhase => 1,
            DeformationKind::SymmetricReal => -1,
            DeformationKind::QReal => 0,
        }
    }
}

/// Which deformation is in use and its exponent (`tau` or `T`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDeformation", into = "RawDeformation")]
pub struct DeformationParameter {
    kind: DeformationKind,
    value: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDeformation {
    kind: DeformationKind,
    value: f64,
}

impl TryFrom<RawDeformation> for DeformationParameter {
    type Error = Error;

    fn try_from(raw: RawDeformation) -> Result<Self> {
        DeformationParameter::new(raw.kind, raw.value)
    }
}

impl From<DeformationParameter> for RawDeformation {
    fn from(d: DeformationParameter) -> Self {
        RawDeformation {
            kind: d.kind,
            value: d.value,
        }
    }
}

impl DeformationParameter {
    pub fn new(kind: DeformationKind, value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::Domain(format!(
                "deformation value {value} is not finite"
            )));
        }
        if kind == DeformationKind::SymmetricPhase && is_multiple_of_pi(value) {
            return Err(Error::Domain(format!(
                "phase deformation tau = {value} is a nonzero multiple of pi (sin tau = 0)"
            )));
        }
        Ok(DeformationParameter { kind, value })
    }

    pub fn symmetric_real(tau: f64) -> Result<Self> {
        Self::new(DeformationKind::SymmetricReal, tau)
    }

    pub fn symmetric_phase(tau: f64) -> Result<Self> {
        Self::new(DeformationKind::SymmetricPhase, tau)
    }

    pub fn q_real(t: f64) -> Result<Self> {
        Self::new(DeformationKind::QReal, t)
    }

    pub fn kind(&self) -> DeformationKind {
        self.kind
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn with_value(&self, value: f64) -> Result<Self> {
        Self::new(self.kind, value)
    }

    pub fn as_q(&self) -> Result<QDeformation> {
        match self.kind {
            DeformationKind::QReal => Ok(QDeformation { t: self.value }),
            _ => Err(Error::Argument(
                "operation requires a Q_real deformation".into(),
            )),
        }
    }

    pub fn as_symmetric(&self) -> Result<SymmetricDeformation> {
        match self.kind {
            DeformationKind::SymmetricReal => Ok(SymmetricDeformation {
                tau: self.value,
                phase: false,
            }),
            DeformationKind::SymmetricPhase => Ok(SymmetricDeformation {
                tau: self.value,
                phase: true,
            }),
            DeformationKind::QReal => Err(Error::Argument(
                "operation requires a q_real or q_phase deformation".into(),
            )),
        }
    }
}

fn is_multiple_of_pi(tau: f64) -> bool {
    let k = (tau / std::f64::consts::PI).round();
    k != 0.0 && (tau - k * std::f64::consts::PI).abs() <= 1e-12 * tau.abs().max(1.0)
}

/// A validated Q-kind deformation, `Q = e^T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QDeformation {
    t: f64,
}

impl QDeformation {
    pub fn new(t: f64) -> Result<Self> {
        DeformationParameter::q_real(t)?.as_q()
    }

    pub fn undeformed() -> Self {
        QDeformation { t: 0.0 }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `Q^x = e^(T x)`.
    pub fn pow(&self, x: f64) -> f64 {
        (self.t * x).exp()
    }

    /// `[x]_Q`, for any real `x`.
    pub fn bracket(&self, x: f64) -> f64 {
        let t = self.t;
        if t.abs() < SMALL_DEFORMATION {
            x + t / 2.0 * (x * x - x) + t * t / 12.0 * (2.0 * x.powi(3) - 3.0 * x * x + x)
        } else {
            (t * x).exp_m1() / t.exp_m1()
        }
    }

    /// `[n]_Q! = [n]_Q [n-1]_Q ... [1]_Q`, with `[0]_Q! = 1`.
    pub fn factorial(&self, n: u32) -> f64 {
        (1..=n).map(|k| self.bracket(k as f64)).product()
    }

    /// Taylor truncation of `[n]_Q` after the `T^order` term, `order <= 3`.
    pub fn taylor(&self, n: f64, order: u32) -> Result<f64> {
        if order > 3 {
            return Err(Error::Unsupported(format!(
                "Q-bracket series is available up to T^3, not T^{order}"
            )));
        }
        let t = self.t;
        let terms = [
            n,
            t / 2.0 * (n * n - n),
            t * t / 12.0 * (2.0 * n.powi(3) - 3.0 * n * n + n),
            t.powi(3) / 24.0 * (n.powi(4) - 2.0 * n.powi(3) + n * n),
        ];
        Ok(terms[..=order as usize].iter().sum())
    }
}

/// A validated symmetric deformation, real or phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricDeformation {
    tau: f64,
    phase: bool,
}

impl SymmetricDeformation {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn is_phase(&self) -> bool {
        self.phase
    }

    pub fn kind(&self) -> DeformationKind {
        if self.phase {
            DeformationKind::SymmetricPhase
        } else {
            DeformationKind::SymmetricReal
        }
    }

    /// `[x]_q`: `sinh(tau x)/sinh(tau)` or `sin(tau x)/sin(tau)`.
    pub fn bracket(&self, x: f64) -> f64 {
        let tau = self.tau;
        if tau.abs() < SMALL_DEFORMATION {
            return self.series(x, 4);
        }
        if self.phase {
            (tau * x).sin() / tau.sin()
        } else {
            (tau * x).sinh() / tau.sinh()
        }
    }

    /// Real part of `q^x`: `e^(tau x)` for real q, `cos(tau x)` for a phase.
    pub fn pow_re(&self, x: f64) -> f64 {
        if self.phase {
            (self.tau * x).cos()
        } else {
            (self.tau * x).exp()
        }
    }

    /// Imaginary part of `q^x` (zero for real q).
    pub fn pow_im(&self, x: f64) -> f64 {
        if self.phase {
            (self.tau * x).sin()
        } else {
            0.0
        }
    }

    /// Taylor truncation of `[n]_q` keeping powers of tau up to `tau_power`
    /// (0, 2 or 4).
    pub fn taylor(&self, n: f64, tau_power: u32) -> Result<f64> {
        match tau_power {
            0 | 2 | 4 => Ok(self.series(n, tau_power)),
            _ => Err(Error::Unsupported(format!(
                "symmetric bracket series is available at tau^0, tau^2, tau^4, not tau^{tau_power}"
            ))),
        }
    }

    fn series(&self, n: f64, tau_power: u32) -> f64 {
        let sign = self.kind().tau2_sign() as f64;
        let tau2 = self.tau * self.tau;
        let mut value = n;
        if tau_power >= 2 {
            value += sign * tau2 / 6.0 * (n - n.powi(3));
        }
        if tau_power >= 4 {
            value += tau2 * tau2 / 360.0 * (7.0 * n - 10.0 * n.powi(3) + 3.0 * n.powi(5));
        }
        value
    }
}

/// `[x]_q` for a symmetric (q_real / q_phase) deformation.
pub fn bracket_symmetric(x: f64, d: &DeformationParameter) -> Result<f64> {
    finite(d.as_symmetric()?.bracket(x), x)
}

/// `[x]_Q` for a Q_real deformation.
pub fn bracket_q(x: f64, d: &DeformationParameter) -> Result<f64> {
    finite(d.as_q()?.bracket(x), x)
}

/// `[n]_Q!`; negative `n` is rejected.
pub fn q_factorial(n: i64, d: &DeformationParameter) -> Result<f64> {
    if n < 0 {
        return Err(Error::Argument(format!(
            "factorial of negative integer {n}"
        )));
    }
    let n = u32::try_from(n)
        .map_err(|_| Error::Argument(format!("factorial argument {n} too large")))?;
    finite(d.as_q()?.factorial(n), n as f64)
}

/// Symmetric-bracket series truncated after `tau^tau_power` (0, 2 or 4).
pub fn taylor_bracket_symmetric(n: f64, d: &DeformationParameter, tau_power: u32) -> Result<f64> {
    d.as_symmetric()?.taylor(n, tau_power)
}

/// Q-bracket series truncated after `T^order` (0 through 3).
pub fn taylor_bracket_q(n: f64, d: &DeformationParameter, order: u32) -> Result<f64> {
    d.as_q()?.taylor(n, order)
}

fn finite(v: f64, x: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("bracket of {x} is not finite")))
    }
}
