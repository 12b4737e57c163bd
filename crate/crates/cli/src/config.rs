//! Run configuration: a JSON document with `model`, `basis` and `task`.

use serde::{Deserialize, Serialize};

use qosc::models::ModelSpec;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub basis: BasisConfig,
    #[serde(default)]
    pub task: TaskConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    pub modes: usize,
    /// Per-mode cutoff.
    pub n_max: u32,
    /// Keeps only levels with at most this many total quanta.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_polyad: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    /// Expansion order (`T^k`, or `tau^(2k)` for symmetric families).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    /// Projector margin of the algebra checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<u32>,
    /// Overrides every verification tolerance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Anharmonicity coefficients used by the generalized-oscillator identity check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare_with: Option<CompareTarget>,
    /// Multiplies every written energy (for example a wavenumber unit).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub free_params: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sse_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_tolerance: Option<f64>,
}

/// Second model of a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CompareTarget {
    /// `"effective"`: the empirical model with the first model's effective constants.
    Named(NamedTarget),
    Model(Box<ModelSpec>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedTarget {
    Effective,
}

impl RunConfig {
    /// Parses and validates a configuration document.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.model.validate()?;
        if let Some(CompareTarget::Model(other)) = &self.task.compare_with {
            other.validate()?;
            if other.modes != self.model.modes {
                return Err(CliError::Usage(format!(
                    "compare_with model has {} modes, model has {}",
                    other.modes, self.model.modes
                )));
            }
        }
        if self.basis.modes != self.model.modes {
            return Err(CliError::Usage(format!(
                "basis has {} modes, model has {}",
                self.basis.modes, self.model.modes
            )));
        }
        if self.basis.n_max == 0 {
            return Err(CliError::Usage("basis.n_max must be positive".into()));
        }
        if let Some(s) = self.task.energy_scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(CliError::Usage(format!(
                    "energy_scale must be positive, got {s}"
                )));
            }
        }
        if let Some(t) = self.task.tolerance {
            if !(t.is_finite() && t >= 0.0) {
                return Err(CliError::Usage(format!("tolerance must be >= 0, got {t}")));
            }
        }
        Ok(())
    }

    pub fn energy_scale(&self) -> f64 {
        self.task.energy_scale.unwrap_or(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "model": {"family": "Q_coupled", "modes": 2, "deformation": {"kind": "Q_real", "value": 0.1}},
        "basis": {"modes": 2, "n_max": 3, "max_polyad": 3},
        "task": {"order": 1, "compare_with": "effective", "fit": {"free_params": ["scale", "T"]}}
    }"#;

    #[test]
    fn round_trip() {
        let config = RunConfig::from_json(SAMPLE).unwrap();
        assert_eq!(
            config.task.compare_with,
            Some(CompareTarget::Named(NamedTarget::Effective))
        );
        let again = RunConfig::from_json(&config.to_json()).unwrap();
        assert_eq!(config, again);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = SAMPLE.replace("\"order\"", "\"ordr\"");
        assert!(RunConfig::from_json(&bad).is_err());
        let bad = SAMPLE.replace("\"max_polyad\"", "\"max_polyads\"");
        assert!(RunConfig::from_json(&bad).is_err());
    }

    #[test]
    fn mode_mismatch_rejected() {
        let bad = SAMPLE.replace("\"basis\": {\"modes\": 2", "\"basis\": {\"modes\": 3");
        assert!(RunConfig::from_json(&bad).is_err());
    }

    #[test]
    fn compare_with_model() {
        let text = SAMPLE.replace(
            "\"effective\"",
            r#"{"family": "empirical_ABA", "modes": 2, "empirical": {"omega": [1, 1], "gamma": [0, 0]}}"#,
        );
        let config = RunConfig::from_json(&text).unwrap();
        assert!(matches!(
            config.task.compare_with,
            Some(CompareTarget::Model(_))
        ));
    }
}
