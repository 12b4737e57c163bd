//! Synthetic level generation and damped least-squares parameter fitting.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::deformation::DeformationKind;
use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::models::{model_levels, Level, LevelSpectrum, ModelSpec, ZeroPoint};

/// Exact model levels on a `(modes, n_max)` basis plus seeded Gaussian noise.
///
/// Noise is drawn in the order of the exact spectrum, so equal inputs give
/// bit-identical output. `sigma = 0` returns the exact levels.
pub fn simulate_levels(
    spec: &ModelSpec,
    n_max: u32,
    sigma: f64,
    seed: u64,
) -> Result<LevelSpectrum> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::Argument(format!(
            "noise sigma must be finite and >= 0, got {sigma}"
        )));
    }
    let basis = FockBasis::new(spec.modes, n_max)?;
    let exact = model_levels(spec, &basis)?;
    if sigma == 0.0 {
        return Ok(exact);
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Argument(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noisy = exact
        .iter()
        .map(|l| Level::new(l.assignment.clone(), l.energy + normal.sample(&mut rng)))
        .collect();
    LevelSpectrum::new(noisy)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Stop when the relative SSE decrease of an accepted step falls below this.
    pub sse_tolerance: f64,
    /// Stop when the step norm falls below this fraction of the parameter norm.
    pub step_tolerance: f64,
    /// Central-difference step relative to `max(|p|, 1)`.
    pub relative_step: f64,
    pub initial_damping: f64,
    /// Jacobian columns with `|cos|` above this are reported as degenerate.
    pub collinearity_threshold: f64,
    /// `GroundReferenced` compares `E - E(0,...,0)` on both sides.
    pub zero_point: ZeroPoint,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 500,
            sse_tolerance: 1e-12,
            step_tolerance: 1e-12,
            relative_step: 1e-6,
            initial_damping: 1e-3,
            collinearity_threshold: 0.999,
            zero_point: ZeroPoint::GroundReferenced,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Free parameters in request order.
    pub params: Vec<(String, f64)>,
    /// Template model with the fitted values substituted.
    pub model: ModelSpec,
    pub sse: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `model - data` per input level, in input order.
    pub residuals: Vec<(Vec<u32>, f64)>,
    /// Norm of `J^T r` at the returned point.
    pub gradient_norm: f64,
    pub condition_note: Option<String>,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn rms(&self) -> f64 {
        if self.residuals.is_empty() {
            0.0
        } else {
            (self.sse / self.residuals.len() as f64).sqrt()
        }
    }
}

/// Residuals `model - data` of a model against levels, in data order.
pub fn model_residuals(
    levels: &LevelSpectrum,
    spec: &ModelSpec,
    options: &FitOptions,
) -> Result<Vec<f64>> {
    let data = Problem::new(levels, options)?;
    data.residuals(spec)
}

struct Problem {
    assignments: Vec<Vec<u32>>,
    targets: Vec<f64>,
    n_max: u32,
    zero_point: ZeroPoint,
}

impl Problem {
    fn new(levels: &LevelSpectrum, options: &FitOptions) -> Result<Self> {
        let modes = levels.modes().unwrap_or(0);
        let offset = match options.zero_point {
            ZeroPoint::Raw => 0.0,
            ZeroPoint::GroundReferenced => levels.energy_of(&vec![0; modes]).ok_or_else(|| {
                Error::Argument(
                    "ground-referenced fitting needs the all-zero level in the data".into(),
                )
            })?,
        };
        Ok(Problem {
            assignments: levels.iter().map(|l| l.assignment.clone()).collect(),
            targets: levels.iter().map(|l| l.energy - offset).collect(),
            n_max: levels
                .iter()
                .flat_map(|l| l.assignment.iter().copied())
                .max()
                .unwrap_or(0)
                .max(1),
            zero_point: options.zero_point,
        })
    }

    fn model_energies(&self, spec: &ModelSpec) -> Result<Vec<f64>> {
        spec.validate()?;
        if let Some(a) = self.assignments.first() {
            if a.len() != spec.modes {
                return Err(Error::Argument(format!(
                    "levels have {} modes, model has {}",
                    a.len(),
                    spec.modes
                )));
            }
        }
        let zero = vec![0; spec.modes];
        let (energies, ground) = if spec.couplings.is_empty() {
            let e = self
                .assignments
                .iter()
                .map(|a| spec.diagonal_energy(a))
                .collect::<Result<Vec<_>>>()?;
            (e, spec.diagonal_energy(&zero)?)
        } else {
            let raw = spec.clone().with_zero_point(ZeroPoint::Raw);
            let levels: BTreeMap<Vec<u32>, f64> =
                model_levels(&raw, &FockBasis::new(spec.modes, self.n_max)?)?.by_assignment();
            let e = self
                .assignments
                .iter()
                .map(|a| {
                    levels
                        .get(a)
                        .copied()
                        .ok_or_else(|| Error::Argument(format!("model has no level {a:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            (e, levels[&zero])
        };
        let offset = match self.zero_point {
            ZeroPoint::Raw => 0.0,
            ZeroPoint::GroundReferenced => ground,
        };
        Ok(energies.into_iter().map(|e| e - offset).collect())
    }

    fn residuals(&self, spec: &ModelSpec) -> Result<Vec<f64>> {
        Ok(self
            .model_energies(spec)?
            .iter()
            .zip(&self.targets)
            .map(|(m, d)| m - d)
            .collect())
    }
}

struct Objective<'a> {
    problem: &'a Problem,
    template: &'a ModelSpec,
    names: &'a [String],
}

impl Objective<'_> {
    fn spec_at(&self, p: &[f64]) -> Result<ModelSpec> {
        let mut spec = self.template.clone();
        for (name, &v) in self.names.iter().zip(p) {
            spec.set_param(name, v)?;
        }
        Ok(spec)
    }

    fn residuals(&self, p: &[f64]) -> Result<DVector<f64>> {
        let r = self.problem.residuals(&self.spec_at(p)?)?;
        Ok(DVector::from_vec(r))
    }

    fn jacobian(&self, p: &[f64], relative_step: f64) -> Result<DMatrix<f64>> {
        let m = self.problem.targets.len();
        let mut j = DMatrix::zeros(m, p.len());
        for k in 0..p.len() {
            let h = relative_step * p[k].abs().max(1.0);
            let mut plus = p.to_vec();
            let mut minus = p.to_vec();
            plus[k] += h;
            minus[k] -= h;
            let column = (self.residuals(&plus)? - self.residuals(&minus)?) / (2.0 * h);
            j.set_column(k, &column);
        }
        Ok(j)
    }
}

fn sse(r: &DVector<f64>) -> f64 {
    r.iter().map(|x| x * x).sum()
}

/// Starting values: a fit `E = w P + a P^2` in the total quanta `P` seeds the
/// scale and, through `T = 2x/(1+x)` with `x = a/w`, the Q deformation.
/// Frequencies of empirical models start at `w`; `c`, couplings and
/// anharmonic constants start at zero; the symmetric deformation keeps its
/// template value.
fn default_init(problem: &Problem, template: &ModelSpec, names: &[String]) -> Vec<f64> {
    let rows = problem.assignments.len();
    let design = DMatrix::from_fn(rows, 2, |r, c| {
        let p: u32 = problem.assignments[r].iter().sum();
        (p as f64).powi(c as i32 + 1)
    });
    let rhs = DVector::from_column_slice(&problem.targets);
    let (w, a) = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map(|s| (s[0], s[1]))
        .unwrap_or((1.0, 0.0));
    let x = if w != 0.0 { a / w } else { 0.0 };
    let t = if (1.0 + x).abs() > 1e-12 {
        2.0 * x / (1.0 + x)
    } else {
        0.0
    };
    let is_q = template.family.deformation_kind() == Some(DeformationKind::QReal);
    names
        .iter()
        .map(|name| match name.as_str() {
            "T" => t,
            "scale" if is_q => (w / (1.0 - t / 2.0)).abs().max(f64::MIN_POSITIVE),
            "scale" => w.abs().max(f64::MIN_POSITIVE),
            "tau" => template.get_param("tau").unwrap_or(0.0),
            n if n.starts_with("omega") => w,
            _ => 0.0,
        })
        .collect()
}

fn condition_note(j: &DMatrix<f64>, names: &[String], threshold: f64) -> Option<String> {
    let norms: Vec<f64> = (0..j.ncols()).map(|k| j.column(k).norm()).collect();
    let mut notes = Vec::new();
    for (k, name) in names.iter().enumerate() {
        if norms[k] == 0.0 {
            notes.push(format!(
                "parameter {name} does not affect the fitted levels"
            ));
        }
    }
    for a in 0..j.ncols() {
        for b in (a + 1)..j.ncols() {
            if norms[a] == 0.0 || norms[b] == 0.0 {
                continue;
            }
            let cos = j.column(a).dot(&j.column(b)) / (norms[a] * norms[b]);
            if cos.abs() > threshold {
                notes.push(format!(
                    "parameters {} and {} are nearly indistinguishable (|cos| = {:.6})",
                    names[a],
                    names[b],
                    cos.abs()
                ));
            }
        }
    }
    (!notes.is_empty()).then(|| notes.join("; "))
}

/// Fits the named free parameters of `template` to `levels` by
/// Levenberg-Marquardt with a central-difference Jacobian.
///
/// Parameters not listed keep their template values. Without `init` the
/// starting point comes from a quadratic fit in the total quanta.
/// Non-convergence is reported through `converged = false` together with
/// the best point found.
pub fn fit(
    levels: &LevelSpectrum,
    template: &ModelSpec,
    free_params: &[String],
    init: Option<&[f64]>,
    options: &FitOptions,
) -> Result<FitResult> {
    if free_params.is_empty() {
        return Err(Error::Argument("no free parameters requested".into()));
    }
    let known = template.parameter_names();
    for (k, name) in free_params.iter().enumerate() {
        if !known.contains(name) {
            return Err(Error::Argument(format!(
                "unknown parameter '{name}' for family {:?} (known: {})",
                template.family,
                known.join(", ")
            )));
        }
        if free_params[..k].contains(name) {
            return Err(Error::Argument(format!("parameter '{name}' listed twice")));
        }
    }
    // the reference level of a ground-referenced fit carries no information
    let informative = match options.zero_point {
        ZeroPoint::GroundReferenced => levels.len().saturating_sub(1),
        ZeroPoint::Raw => levels.len(),
    };
    if informative < free_params.len() {
        return Err(Error::Underdetermined {
            levels: informative,
            params: free_params.len(),
        });
    }
    let problem = Problem::new(levels, options)?;
    let objective = Objective {
        problem: &problem,
        template,
        names: free_params,
    };

    let mut p: Vec<f64> = match init {
        Some(v) if v.len() != free_params.len() => {
            return Err(Error::Argument(format!(
                "initial vector has {} entries for {} free parameters",
                v.len(),
                free_params.len()
            )))
        }
        Some(v) => v.to_vec(),
        None => default_init(&problem, template, free_params),
    };
    let mut r = objective.residuals(&p)?;
    let mut current = sse(&r);
    let mut mu = options.initial_damping;
    let mut converged = current == 0.0;
    let mut iterations = 0;

    while !converged && iterations < options.max_iterations {
        iterations += 1;
        let j = objective.jacobian(&p, options.relative_step)?;
        let jt = j.transpose();
        let a = &jt * &j;
        let g = &jt * &r;
        let diag_floor = a.diagonal().amax() * 1e-15;
        let mut accepted = None;
        while mu < 1e16 {
            let mut damped = a.clone();
            for k in 0..p.len() {
                damped[(k, k)] += mu * a[(k, k)].max(diag_floor).max(f64::MIN_POSITIVE);
            }
            let Some(step) = damped.cholesky().map(|c| c.solve(&(-&g))) else {
                mu *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
            match objective.residuals(&trial) {
                Ok(rt) if sse(&rt) <= current && sse(&rt).is_finite() => {
                    accepted = Some((trial, rt, step.norm()));
                    mu = (mu / 10.0).max(1e-15);
                    break;
                }
                _ => mu *= 10.0,
            }
        }
        let Some((trial, rt, step_norm)) = accepted else {
            // no descent direction is left at machine precision
            converged = true;
            break;
        };
        let new = sse(&rt);
        let relative = if current > 0.0 {
            (current - new) / current
        } else {
            0.0
        };
        let p_norm = trial.iter().map(|x| x * x).sum::<f64>().sqrt();
        p = trial;
        r = rt;
        current = new;
        if current == 0.0
            || relative < options.sse_tolerance
            || step_norm < options.step_tolerance * p_norm
        {
            converged = true;
        }
    }

    let j = objective.jacobian(&p, options.relative_step)?;
    let gradient_norm = (j.transpose() * &r).norm();
    let model = objective.spec_at(&p)?;
    Ok(FitResult {
        params: free_params.iter().cloned().zip(p.iter().copied()).collect(),
        model,
        sse: current,
        iterations,
        converged,
        residuals: problem
            .assignments
            .iter()
            .cloned()
            .zip(r.iter().copied())
            .collect(),
        gradient_norm,
        condition_note: condition_note(&j, free_params, options.collinearity_threshold),
    })
}
