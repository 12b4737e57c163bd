//! The subcommands, as pure functions from configuration to output text.

use serde::Serialize;

use qosc::analysis::{compare_spectra, effective_constants, EffectiveConstants};
use qosc::deformation::DeformationKind;
use qosc::fit::{fit, FitOptions, FitResult};
use qosc::fock::FockBasis;
use qosc::models::{model_levels, LevelSpectrum, ModelSpec};
use qosc::report::VerificationReport;
use qosc::series::expand_model;
use qosc::verify::{verify_suite, SuiteOptions};

use crate::config::{CompareTarget, NamedTarget, RunConfig};
use crate::error::CliError;
use crate::format::{fmt_num, round_sig};
use crate::levels_io::write_levels_csv;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Result of a subcommand that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Document to write to the output file or stdout.
    pub output: String,
    /// False for failed checks or a non-converged fit (exit 1).
    pub success: bool,
    /// Human-readable notes for stderr.
    pub notes: Vec<String>,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Outcome {
            output,
            success: true,
            notes: Vec::new(),
        }
    }
}

fn csv_document(header: &[String], rows: &[Vec<String>]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).expect("in-memory write");
    for row in rows {
        writer.write_record(row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn json_document<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

fn levels_for(spec: &ModelSpec, config: &RunConfig) -> Result<LevelSpectrum, CliError> {
    let basis = FockBasis::new(config.basis.modes, config.basis.n_max)?;
    let levels = model_levels(spec, &basis)?;
    Ok(match config.basis.max_polyad {
        Some(p) => levels.within_polyad(p),
        None => levels,
    })
}

#[derive(Serialize)]
struct LevelRow {
    assignment: Vec<u32>,
    polyad: u32,
    energy: f64,
}

/// Level energies of the configured model on the configured basis.
pub fn spectrum(config: &RunConfig, format: Format) -> Result<Outcome, CliError> {
    let levels = levels_for(&config.model, config)?;
    let unit = config.energy_scale();
    let output = match format {
        Format::Csv => write_levels_csv(&levels, config.model.modes, unit),
        Format::Json => {
            let rows: Vec<LevelRow> = levels
                .iter()
                .map(|l| LevelRow {
                    assignment: l.assignment.clone(),
                    polyad: l.polyad,
                    energy: round_sig(l.energy * unit),
                })
                .collect();
            json_document(&rows)
        }
    };
    Ok(Outcome::ok(output))
}

#[derive(Serialize)]
struct ConstantsDoc {
    omega: Vec<f64>,
    gamma: Vec<f64>,
    gamma_cross: Vec<Vec<f64>>,
    linear: Vec<f64>,
    quadratic: Vec<f64>,
    cross: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct ExpandDoc {
    symbol: &'static str,
    order: u32,
    series: String,
    effective_constants: Option<ConstantsDoc>,
}

fn constant_rows(c: &EffectiveConstants) -> Vec<(String, f64)> {
    let l = c.omega.len();
    let mut rows = Vec::new();
    for i in 0..l {
        rows.push((format!("omega{}", i + 1), c.omega[i]));
    }
    for i in 0..l {
        rows.push((format!("gamma{}", i + 1), c.gamma[i]));
    }
    for i in 0..l {
        for j in i + 1..l {
            rows.push((format!("gamma{}{}", i + 1, j + 1), c.gamma_cross[i][j]));
        }
    }
    for i in 0..l {
        rows.push((format!("linear{}", i + 1), c.linear[i]));
    }
    for i in 0..l {
        rows.push((format!("quadratic{}", i + 1), c.quadratic[i]));
    }
    for i in 0..l {
        for j in i + 1..l {
            rows.push((format!("cross{}{}", i + 1, j + 1), c.cross[i][j]));
        }
    }
    rows
}

/// Truncated series of a diagonal model, with the empirical constants of
/// multi-mode Q families.
pub fn expand(config: &RunConfig, format: Format) -> Result<Outcome, CliError> {
    let order = config.task.order.unwrap_or(1);
    let series = expand_model(&config.model, order)?;
    let constants = if config.model.family.deformation_kind() == Some(DeformationKind::QReal)
        && config.model.modes >= 2
    {
        Some(effective_constants(&config.model)?)
    } else {
        None
    };
    let unit = config.energy_scale();
    let output = match format {
        Format::Csv => {
            let mut rows = vec![vec!["series".to_string(), series.to_string()]];
            if let Some(c) = &constants {
                rows.extend(
                    constant_rows(c)
                        .into_iter()
                        .map(|(name, v)| vec![name, fmt_num(v * unit)]),
                );
            }
            csv_document(&["quantity".into(), "value".into()], &rows)
        }
        Format::Json => {
            let scaled = |v: &[f64]| v.iter().map(|x| round_sig(x * unit)).collect::<Vec<_>>();
            let scaled2 = |m: &[Vec<f64>]| m.iter().map(|r| scaled(r)).collect::<Vec<_>>();
            json_document(&ExpandDoc {
                symbol: series.symbol().name(),
                order,
                series: series.to_string(),
                effective_constants: constants.as_ref().map(|c| ConstantsDoc {
                    omega: scaled(&c.omega),
                    gamma: scaled(&c.gamma),
                    gamma_cross: scaled2(&c.gamma_cross),
                    linear: scaled(&c.linear),
                    quadratic: scaled(&c.quadratic),
                    cross: scaled2(&c.cross),
                }),
            })
        }
    };
    Ok(Outcome::ok(output))
}

/// The invariant suite for the model's deformation.
pub fn verify(config: &RunConfig, format: Format) -> Result<Outcome, CliError> {
    let d = config.model.deformation.ok_or_else(|| {
        CliError::Usage("verify needs a deformed model; empirical families have none".into())
    })?;
    let defaults = SuiteOptions::default();
    let options = SuiteOptions {
        n_max: config.basis.n_max,
        margin: config.task.margin.unwrap_or(defaults.margin),
        tolerance: config.task.tolerance,
        c: config.task.c.unwrap_or(defaults.c),
    };
    let report = verify_suite(&d, &options)?;
    let output = match format {
        Format::Json => json_document(&rounded_report(&report)),
        Format::Csv => {
            let header: Vec<String> = ["name", "paper_ref", "residual", "tolerance", "pass"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            let rows: Vec<Vec<String>> = report
                .checks
                .iter()
                .map(|c| {
                    vec![
                        c.name.clone(),
                        c.relation.clone(),
                        fmt_num(c.residual),
                        fmt_num(c.tolerance),
                        c.pass.to_string(),
                    ]
                })
                .collect();
            csv_document(&header, &rows)
        }
    };
    let notes = report
        .failures()
        .map(|c| {
            format!(
                "FAIL {}: residual {} > tolerance {}",
                c.name,
                fmt_num(c.residual),
                fmt_num(c.tolerance)
            )
        })
        .collect();
    Ok(Outcome {
        output,
        success: report.passed(),
        notes,
    })
}

fn rounded_report(report: &VerificationReport) -> Vec<qosc::report::Check> {
    report
        .checks
        .iter()
        .map(|c| {
            let mut c = c.clone();
            c.residual = round_sig(c.residual);
            c.tolerance = round_sig(c.tolerance);
            c
        })
        .collect()
}

#[derive(Serialize)]
struct ParamRow {
    name: String,
    value: f64,
}

#[derive(Serialize)]
struct ResidualRow {
    assignment: Vec<u32>,
    residual: f64,
}

#[derive(Serialize)]
struct FitDoc {
    converged: bool,
    iterations: usize,
    sse: f64,
    rms: f64,
    gradient_norm: f64,
    condition_note: Option<String>,
    params: Vec<ParamRow>,
    residuals: Vec<ResidualRow>,
}

/// Fits the configured free parameters to `levels` (model units).
pub fn fit_levels(
    config: &RunConfig,
    levels: &LevelSpectrum,
    format: Format,
) -> Result<Outcome, CliError> {
    let fc = config
        .task
        .fit
        .as_ref()
        .ok_or_else(|| CliError::Usage("fit needs task.fit.free_params".into()))?;
    let mut options = FitOptions::default();
    if let Some(n) = fc.max_iterations {
        options.max_iterations = n;
    }
    if let Some(t) = fc.sse_tolerance {
        options.sse_tolerance = t;
    }
    if let Some(t) = fc.step_tolerance {
        options.step_tolerance = t;
    }
    let result = fit(
        levels,
        &config.model,
        &fc.free_params,
        fc.init.as_deref(),
        &options,
    )?;
    let output = match format {
        Format::Json => json_document(&fit_doc(&result)),
        Format::Csv => {
            let mut rows: Vec<Vec<String>> = result
                .params
                .iter()
                .map(|(n, v)| vec![n.clone(), fmt_num(*v)])
                .collect();
            rows.push(vec!["converged".into(), result.converged.to_string()]);
            rows.push(vec!["iterations".into(), result.iterations.to_string()]);
            rows.push(vec!["sse".into(), fmt_num(result.sse)]);
            rows.push(vec!["rms".into(), fmt_num(result.rms())]);
            rows.push(vec!["gradient_norm".into(), fmt_num(result.gradient_norm)]);
            csv_document(&["quantity".into(), "value".into()], &rows)
        }
    };
    let mut notes = Vec::new();
    if let Some(note) = &result.condition_note {
        notes.push(format!("warning: {note}"));
    }
    if !result.converged {
        notes.push(format!(
            "fit did not converge within {} iterations",
            options.max_iterations
        ));
    }
    Ok(Outcome {
        output,
        success: result.converged,
        notes,
    })
}

fn fit_doc(r: &FitResult) -> FitDoc {
    FitDoc {
        converged: r.converged,
        iterations: r.iterations,
        sse: round_sig(r.sse),
        rms: round_sig(r.rms()),
        gradient_norm: round_sig(r.gradient_norm),
        condition_note: r.condition_note.clone(),
        params: r
            .params
            .iter()
            .map(|(n, v)| ParamRow {
                name: n.clone(),
                value: round_sig(*v),
            })
            .collect(),
        residuals: r
            .residuals
            .iter()
            .map(|(a, v)| ResidualRow {
                assignment: a.clone(),
                residual: round_sig(*v),
            })
            .collect(),
    }
}

/// The second model of a comparison.
pub fn comparison_model(config: &RunConfig) -> Result<ModelSpec, CliError> {
    match &config.task.compare_with {
        None => Err(CliError::Usage("compare needs task.compare_with".into())),
        Some(CompareTarget::Model(m)) => Ok((**m).clone()),
        Some(CompareTarget::Named(NamedTarget::Effective)) => {
            let c = effective_constants(&config.model)?;
            Ok(if config.model.modes == 2 {
                c.to_empirical_triatomic()?
            } else {
                c.to_empirical_polyatomic()?
            })
        }
    }
}

#[derive(Serialize)]
struct CompareDoc {
    max_abs: f64,
    rms: f64,
    residuals: Vec<ResidualRow>,
}

/// Ground-referenced level differences `model - compare_with` per assignment.
pub fn compare(config: &RunConfig, format: Format) -> Result<Outcome, CliError> {
    let other = comparison_model(config)?;
    let a = levels_for(&config.model, config)?;
    let b = levels_for(&other, config)?;
    let cmp = compare_spectra(&a, &b)?;
    let unit = config.energy_scale();
    let output = match format {
        Format::Csv => {
            let header: Vec<String> = (1..=config.model.modes)
                .map(|i| format!("n{i}"))
                .chain(std::iter::once("residual".into()))
                .collect();
            let rows: Vec<Vec<String>> = cmp
                .residuals
                .iter()
                .map(|(a, r)| {
                    a.iter()
                        .map(u32::to_string)
                        .chain(std::iter::once(fmt_num(r * unit)))
                        .collect()
                })
                .collect();
            csv_document(&header, &rows)
        }
        Format::Json => json_document(&CompareDoc {
            max_abs: round_sig(cmp.max_abs * unit),
            rms: round_sig(cmp.rms * unit),
            residuals: cmp
                .residuals
                .iter()
                .map(|(a, r)| ResidualRow {
                    assignment: a.clone(),
                    residual: round_sig(r * unit),
                })
                .collect(),
        }),
    };
    Ok(Outcome {
        output,
        success: true,
        notes: vec![format!(
            "max_abs {} rms {}",
            fmt_num(cmp.max_abs * unit),
            fmt_num(cmp.rms * unit)
        )],
    })
}
