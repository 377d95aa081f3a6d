use serde::{Deserialize, Serialize};

/// Default KS critical constants for `sqrt(n_eff) * D`.
pub const KS_C_1PCT: f64 = 1.628;
pub const KS_C_5PCT: f64 = 1.358;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Value(f64),
    /// A distribution; the estimate is then a distance to it.
    Cdf(String),
}

impl Target {
    pub fn value(&self) -> f64 {
        match self {
            Target::Value(v) => *v,
            Target::Cdf(_) => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum ToleranceRule {
    /// `|estimate - target| <= k se + allowance`
    WithinSigma { k: f64, allowance: f64 },
    /// `estimate <= target + k se + allowance`
    AtMostSigma { k: f64, allowance: f64 },
    /// `|estimate - target| <= tol`
    Absolute { tol: f64 },
    /// `|estimate / target - 1| <= tol`
    Relative { tol: f64 },
    AtMost,
    AtLeast,
    /// `estimate > target`
    Above,
    /// `statistic <= c / sqrt(n_eff)`
    KsCritical { c: f64, n_eff: f64 },
}

impl ToleranceRule {
    pub fn passes(&self, estimate: f64, target: f64, se: f64, statistic: f64) -> bool {
        if !estimate.is_finite() {
            return false;
        }
        match *self {
            Self::WithinSigma { k, allowance } => (estimate - target).abs() <= k * se + allowance,
            Self::AtMostSigma { k, allowance } => estimate <= target + k * se + allowance,
            Self::Absolute { tol } => (estimate - target).abs() <= tol,
            Self::Relative { tol } => (estimate / target - 1.0).abs() <= tol,
            Self::AtMost => estimate <= target,
            Self::AtLeast => estimate >= target,
            Self::Above => estimate > target,
            Self::KsCritical { c, n_eff } => statistic <= c / n_eff.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub name: String,
    pub target: Target,
    pub estimate: f64,
    pub standard_error: Option<f64>,
    pub statistic: Option<f64>,
    pub tolerance: ToleranceRule,
    pub pass: bool,
    pub seed: Option<u64>,
    pub sample_size: usize,
    /// Secondary named statistics, in insertion order.
    pub details: Vec<(String, f64)>,
}

impl ValidationReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        target: Target,
        estimate: f64,
        standard_error: Option<f64>,
        statistic: Option<f64>,
        tolerance: ToleranceRule,
        seed: Option<u64>,
        sample_size: usize,
    ) -> Self {
        let pass = tolerance.passes(
            estimate,
            target.value(),
            standard_error.unwrap_or(0.0),
            statistic.unwrap_or(estimate),
        );
        Self {
            name: name.into(),
            target,
            estimate,
            standard_error,
            statistic,
            tolerance,
            pass,
            seed,
            sample_size,
            details: Vec::new(),
        }
    }

    pub fn with_detail(mut self, key: impl Into<String>, value: f64) -> Self {
        self.details.push((key.into(), value));
        self
    }

    pub fn detail(&self, key: &str) -> Option<f64> {
        self.details.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    /// Recomputes the pass flag from the stored fields.
    pub fn recheck(&self) -> bool {
        self.tolerance.passes(
            self.estimate,
            self.target.value(),
            self.standard_error.unwrap_or(0.0),
            self.statistic.unwrap_or(self.estimate),
        )
    }

    /// One table row: name, estimate, target, pass.
    pub fn summary_line(&self) -> String {
        let target = match &self.target {
            Target::Value(v) => format!("{v:.6}"),
            Target::Cdf(d) => d.clone(),
        };
        format!(
            "{:<32} estimate {:>12.6}  target {:<24} {}",
            self.name,
            self.estimate,
            target,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_is_function_of_fields() {
        let r = ValidationReport::new(
            "x",
            Target::Value(0.7),
            0.702,
            Some(0.001),
            None,
            ToleranceRule::WithinSigma { k: 3.0, allowance: 0.0 },
            Some(1),
            10,
        );
        assert!(r.pass);
        assert_eq!(r.recheck(), r.pass);
        let r2 = ValidationReport { estimate: 0.71, ..r };
        assert!(!r2.recheck());
    }

    #[test]
    fn json_round_trip() {
        let r = ValidationReport::new(
            "ks",
            Target::Cdf("law".into()),
            0.02,
            None,
            Some(0.02),
            ToleranceRule::KsCritical { c: KS_C_1PCT, n_eff: 1e4 },
            Some(3),
            10_000,
        )
        .with_detail("p_value", 0.2);
        let s = serde_json::to_string(&r).unwrap();
        let back: ValidationReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        assert!(!r.pass);
    }
}
