//! Exact expansion of the deformed level formulas in the deformation parameter.
//!
//! Coefficients are polynomials with rational coefficients in the deformation
//! symbol (`T` or `tau`) and the anharmonicity coefficients `c_i`. Parameters
//! that are exactly zero are substituted away, so an undeformed model expands
//! to its harmonic polynomial.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::deformation::DeformationKind;
use crate::error::{Error, Result};
use crate::models::{Family, ModelSpec, ZeroPoint};

/// Highest power of `T` kept by the Q-bracket series.
pub const MAX_Q_ORDER: u32 = 3;
/// Highest power of `tau^2` kept by the symmetric-bracket series.
pub const MAX_SYMMETRIC_ORDER: u32 = 2;

/// Sparse polynomial with exact rational coefficients.
///
/// Variable 0 is the deformation symbol, variables `1..=l` are `c_1..c_l`
/// and variables `l+1..=2l` are `n_1..n_l`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl Poly {
    fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    fn constant(nvars: usize, value: BigRational) -> Self {
        let mut p = Poly::zero(nvars);
        if !value.is_zero() {
            p.terms.insert(vec![0; nvars], value);
        }
        p
    }

    fn var(nvars: usize, index: usize) -> Self {
        let mut exps = vec![0; nvars];
        exps[index] = 1;
        let mut p = Poly::zero(nvars);
        p.terms.insert(exps, BigRational::one());
        p
    }

    fn add_term(&mut self, exps: Vec<u32>, coef: BigRational) {
        let entry = self.terms.entry(exps).or_insert_with(BigRational::zero);
        *entry += coef;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    fn scale(&self, factor: &BigRational) -> Poly {
        if factor.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c * factor))
                .collect(),
        }
    }

    /// Product truncated to degree `<= max0` in variable 0.
    fn mul(&self, other: &Poly, max0: u32) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                if ea[0] + eb[0] > max0 {
                    continue;
                }
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    fn pow(&self, k: u32, max0: u32) -> Poly {
        let mut out = Poly::constant(self.nvars, BigRational::one());
        for _ in 0..k {
            out = out.mul(self, max0);
        }
        out
    }
}

/// Deformation symbol of an expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symbol {
    T,
    Tau,
}

impl Symbol {
    pub fn name(self) -> &'static str {
        match self {
            Symbol::T => "T",
            Symbol::Tau => "tau",
        }
    }
}

/// Coefficient of one quantum-number monomial: a polynomial in the
/// deformation symbol and the `c_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coefficient {
    symbol: Symbol,
    /// Exponent tuples `(symbol, c_1, ..., c_l)`.
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl Coefficient {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exact rational multiplying `symbol^power * prod c_i^{c_exps[i]}`.
    ///
    /// An empty `c_exps` means no `c` factors.
    pub fn term(&self, power: u32, c_exps: &[u32]) -> BigRational {
        self.terms
            .iter()
            .find(|(e, _)| {
                e[0] == power
                    && (1..e.len()).all(|i| e[i] == c_exps.get(i - 1).copied().unwrap_or(0))
            })
            .map(|(_, c)| c.clone())
            .unwrap_or_else(BigRational::zero)
    }

    /// Number of distinct `(symbol, c)` monomials.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn evaluate(&self, deformation: f64, c: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, coef)| {
                let mut v = to_f64(coef) * deformation.powi(e[0] as i32);
                for (i, &k) in e[1..].iter().enumerate() {
                    v *= c[i].powi(k as i32);
                }
                v
            })
            .sum()
    }

    fn var_name(&self, index: usize) -> String {
        if index == 0 {
            self.symbol.name().to_string()
        } else {
            format!("c{index}")
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<(String, &BigRational)> = ordered(&self.terms)
            .into_iter()
            .map(|(e, c)| (monomial_text(e, |i| self.var_name(i)), c))
            .collect();
        write_sum(f, &terms)
    }
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Total degree ascending, then descending lexicographic exponent tuple.
fn ordered<V>(terms: &BTreeMap<Vec<u32>, V>) -> Vec<(&Vec<u32>, &V)> {
    let mut v: Vec<_> = terms.iter().collect();
    v.sort_by(|(a, _), (b, _)| {
        let da: u32 = a.iter().sum();
        let db: u32 = b.iter().sum();
        da.cmp(&db).then_with(|| b.cmp(a))
    });
    v
}

fn monomial_text(exps: &[u32], name: impl Fn(usize) -> String) -> String {
    exps.iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(i, &k)| {
            if k == 1 {
                name(i)
            } else {
                format!("{}^{k}", name(i))
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn rational_text(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Writes `a + b - c` with signs pulled out of single rational factors.
fn write_sum(f: &mut fmt::Formatter<'_>, terms: &[(String, &BigRational)]) -> fmt::Result {
    if terms.is_empty() {
        return write!(f, "0");
    }
    for (k, (mono, coef)) in terms.iter().enumerate() {
        let negative = coef.is_negative();
        match (k, negative) {
            (0, true) => write!(f, "-")?,
            (0, false) => {}
            (_, true) => write!(f, " - ")?,
            (_, false) => write!(f, " + ")?,
        }
        let mag = coef.abs();
        if mono.is_empty() {
            write!(f, "{}", rational_text(&mag))?;
        } else if mag.is_one() {
            write!(f, "{mono}")?;
        } else {
            write!(f, "{} {mono}", rational_text(&mag))?;
        }
    }
    Ok(())
}

/// Truncated expansion of a level formula as a polynomial in the quantum numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPolynomial {
    modes: usize,
    symbol: Symbol,
    /// Highest retained power of the deformation symbol.
    max_power: u32,
    deformation_value: f64,
    c_values: Vec<f64>,
    terms: BTreeMap<Vec<u32>, Coefficient>,
}

impl SeriesPolynomial {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn symbol(&self) -> Symbol {
        self.symbol
    }

    /// Highest retained power of the deformation symbol (`T^k` or `tau^{2k}`).
    pub fn max_power(&self) -> u32 {
        self.max_power
    }

    /// Coefficient of `prod n_i^{exps[i]}`, `None` when it vanishes.
    pub fn coefficient(&self, exps: &[u32]) -> Option<&Coefficient> {
        self.terms.get(exps)
    }

    /// Nonzero monomials with their coefficients in canonical order.
    pub fn terms(&self) -> Vec<(&Vec<u32>, &Coefficient)> {
        ordered(&self.terms)
    }

    /// Numeric coefficient of a monomial at the model's parameter values.
    pub fn coefficient_value(&self, exps: &[u32]) -> f64 {
        self.coefficient(exps)
            .map_or(0.0, |c| c.evaluate(self.deformation_value, &self.c_values))
    }

    /// Value at integer quantum numbers using the model's parameter values.
    pub fn evaluate(&self, n: &[u32]) -> f64 {
        self.evaluate_with(n, self.deformation_value, &self.c_values)
    }

    /// Value at given quantum numbers, deformation and `c` values.
    pub fn evaluate_with(&self, n: &[u32], deformation: f64, c: &[f64]) -> f64 {
        let c_full: Vec<f64> = (0..self.modes)
            .map(|i| c.get(i).copied().unwrap_or(0.0))
            .collect();
        self.terms
            .iter()
            .map(|(e, coef)| {
                let mono: f64 = e
                    .iter()
                    .zip(n)
                    .map(|(&k, &ni)| (ni as f64).powi(k as i32))
                    .product();
                coef.evaluate(deformation, &c_full) * mono
            })
            .sum()
    }
}

impl fmt::Display for SeriesPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ordered = self.terms();
        if ordered.is_empty() {
            return write!(f, "0");
        }
        for (k, (exps, coef)) in ordered.iter().enumerate() {
            let mono = monomial_text(exps, |i| format!("n{}", i + 1));
            if coef.len() == 1 {
                let (ce, cr) = coef.terms.iter().next().expect("one term");
                let cmono = monomial_text(ce, |i| coef.var_name(i));
                let joined = match (cmono.is_empty(), mono.is_empty()) {
                    (true, _) => mono.clone(),
                    (false, true) => cmono,
                    (false, false) => format!("{cmono} {mono}"),
                };
                if k > 0 {
                    write!(f, "{}", if cr.is_negative() { " - " } else { " + " })?;
                } else if cr.is_negative() {
                    write!(f, "-")?;
                }
                let mag = cr.abs();
                if joined.is_empty() {
                    write!(f, "{}", rational_text(&mag))?;
                } else if mag.is_one() {
                    write!(f, "{joined}")?;
                } else {
                    write!(f, "{} {joined}", rational_text(&mag))?;
                }
            } else {
                if k > 0 {
                    write!(f, " + ")?;
                }
                if mono.is_empty() {
                    write!(f, "({coef})")?;
                } else {
                    write!(f, "({coef}) {mono}")?;
                }
            }
        }
        Ok(())
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact rational equal to the shortest decimal representation of `x`.
pub(crate) fn decimal_rational(x: f64) -> Result<BigRational> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("cannot represent {x} exactly")));
    }
    let text = format!("{x}");
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.as_str()),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    let numer: BigInt = format!("{int_part}{frac_part}")
        .parse()
        .map_err(|_| Error::Domain(format!("cannot parse {x} as a decimal")))?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(numer, denom);
    Ok(if negative { -r } else { r })
}

/// Taylor coefficients of the bracket as polynomials in its argument `N`,
/// listed by power of the deformation symbol: `(power, [(N exponent, rational)])`.
fn bracket_series(kind: DeformationKind) -> Vec<(u32, Vec<(u32, BigRational)>)> {
    match kind {
        DeformationKind::QReal => vec![
            (0, vec![(1, rat(1, 1))]),
            (1, vec![(2, rat(1, 2)), (1, rat(-1, 2))]),
            (2, vec![(3, rat(2, 12)), (2, rat(-3, 12)), (1, rat(1, 12))]),
            (3, vec![(4, rat(1, 24)), (3, rat(-2, 24)), (2, rat(1, 24))]),
        ],
        _ => {
            let s = kind.tau2_sign() as i64;
            vec![
                (0, vec![(1, rat(1, 1))]),
                (2, vec![(1, rat(s, 6)), (3, rat(-s, 6))]),
                (
                    4,
                    vec![(1, rat(7, 360)), (3, rat(-10, 360)), (5, rat(3, 360))],
                ),
            ]
        }
    }
}

/// Composes the bracket series with an argument polynomial.
fn bracket_of(arg: &Poly, kind: DeformationKind, max_power: u32, symbol_var: &Poly) -> Poly {
    let nvars = arg.nvars;
    let mut out = Poly::zero(nvars);
    for (power, coeffs) in bracket_series(kind) {
        if power > max_power {
            continue;
        }
        let mut inner = Poly::zero(nvars);
        for (k, r) in coeffs {
            inner = inner.add(&arg.pow(k, max_power).scale(&r));
        }
        out = out.add(&inner.mul(&symbol_var.pow(power, max_power), max_power));
    }
    out
}

/// Expands a diagonal model's level formula to the given order.
///
/// For the Q families `order` is the highest power of `T` (at most 3); for the
/// symmetric families it is the highest power of `tau^2` (at most 2). The
/// result is multiplied by the model scale and ground-referenced when the
/// model asks for it.
pub fn expand_model(spec: &ModelSpec, order: u32) -> Result<SeriesPolynomial> {
    spec.validate()?;
    if !spec.couplings.is_empty() {
        return Err(Error::Unsupported(
            "expansions exist only for models without coupling terms".into(),
        ));
    }
    let kind = spec.family.deformation_kind().ok_or_else(|| {
        Error::Unsupported("empirical families are already polynomials; nothing to expand".into())
    })?;
    let d = spec.deformation.expect("validated");
    let (symbol, max_power, kind) = match kind {
        DeformationKind::QReal => {
            if order > MAX_Q_ORDER {
                return Err(Error::Argument(format!(
                    "expansion order {order} exceeds the supported T^{MAX_Q_ORDER}"
                )));
            }
            (Symbol::T, order, DeformationKind::QReal)
        }
        _ => {
            if order > MAX_SYMMETRIC_ORDER {
                return Err(Error::Argument(format!(
                    "expansion order {order} exceeds the supported tau^{}",
                    2 * MAX_SYMMETRIC_ORDER
                )));
            }
            (Symbol::Tau, 2 * order, d.kind())
        }
    };

    let l = spec.modes;
    let nvars = 1 + 2 * l;
    let n_var = |i: usize| Poly::var(nvars, 1 + l + i);
    let symbol_var = if d.value() == 0.0 {
        Poly::zero(nvars)
    } else {
        Poly::var(nvars, 0)
    };
    let c_var = |i: usize| {
        if spec.c[i] == 0.0 {
            Poly::zero(nvars)
        } else {
            Poly::var(nvars, 1 + i)
        }
    };

    let sum_n = (0..l).fold(Poly::zero(nvars), |acc, i| acc.add(&n_var(i)));
    let one = Poly::constant(nvars, BigRational::one());
    let half = rat(1, 2);
    let body = match spec.family {
        Family::QCoupled | Family::SymmetricCoupled => {
            bracket_of(&sum_n, kind, max_power, &symbol_var)
        }
        Family::QAnharmonicSingle | Family::QGeneralized => {
            let arg = (0..l).fold(Poly::zero(nvars), |acc, i| {
                let ni = n_var(i);
                acc.add(&ni)
                    .add(&c_var(i).mul(&ni.mul(&ni, max_power), max_power))
            });
            bracket_of(&arg, kind, max_power, &symbol_var)
        }
        Family::QSingle | Family::SymmetricSingle => {
            let lower = bracket_of(&sum_n, kind, max_power, &symbol_var);
            let upper = bracket_of(&sum_n.add(&one), kind, max_power, &symbol_var);
            lower.add(&upper).scale(&half)
        }
        Family::EmpiricalPolyatomic | Family::EmpiricalTriatomic => unreachable!("rejected above"),
    };
    let mut poly = body.scale(&decimal_rational(spec.scale)?);
    if spec.zero_point == ZeroPoint::GroundReferenced {
        poly.terms.retain(|e, _| e[1 + l..].iter().any(|&k| k > 0));
    }

    let mut terms: BTreeMap<Vec<u32>, Coefficient> = BTreeMap::new();
    for (e, c) in poly.terms {
        let entry = terms
            .entry(e[1 + l..].to_vec())
            .or_insert_with(|| Coefficient {
                symbol,
                terms: BTreeMap::new(),
            });
        entry.terms.insert(e[..1 + l].to_vec(), c);
    }
    Ok(SeriesPolynomial {
        modes: l,
        symbol,
        max_power,
        deformation_value: d.value(),
        c_values: if spec.c.is_empty() {
            vec![0.0; l]
        } else {
            spec.c.clone()
        },
        terms,
    })
}
