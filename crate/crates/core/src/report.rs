use serde::Serialize;

/// One named identity check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// The relation being checked, in plain notation.
    #[serde(rename = "paper_ref")]
    pub relation: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(
        name: impl Into<String>,
        relation: impl Into<String>,
        residual: f64,
        tolerance: f64,
    ) -> Self {
        Check {
            name: name.into(),
            relation: relation.into(),
            residual,
            tolerance,
            // NaN residuals fail
            pass: residual <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Replaces every tolerance, re-evaluating pass flags.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        for c in &mut self.checks {
            c.tolerance = tolerance;
            c.pass = c.residual <= tolerance;
        }
        self
    }
}
