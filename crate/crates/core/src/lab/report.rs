use std::time::Duration;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

/// What a check's bound rests on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Oracle {
    /// A closed form or a proved inequality.
    Analytic,
    /// A Monte Carlo estimate compared with its standard error.
    Statistical,
    /// A definition, format or determinism contract.
    Structural,
}

/// One named check with the number it measured and the bound it was held to.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub group: String,
    pub name: String,
    pub status: Status,
    pub measured: f64,
    pub bound: f64,
    pub tolerance: f64,
    pub oracle: Oracle,
    pub detail: String,
    /// Wall-clock time of the check's group. Kept out of serialized reports
    /// so that they are reproducible byte for byte.
    #[serde(skip)]
    pub runtime: Duration,
}

impl Check {
    fn build(group: &str, name: &str, pass: bool, measured: f64, bound: f64, tolerance: f64, oracle: Oracle) -> Self {
        Self {
            group: group.to_string(),
            name: name.to_string(),
            status: if pass { Status::Pass } else { Status::Fail },
            measured,
            bound,
            tolerance,
            oracle,
            detail: String::new(),
            runtime: Duration::ZERO,
        }
    }

    /// Passes when `measured ≤ bound + tolerance`.
    pub fn at_most(group: &str, name: &str, measured: f64, bound: f64, tolerance: f64, oracle: Oracle) -> Self {
        Self::build(group, name, measured <= bound + tolerance, measured, bound, tolerance, oracle)
    }

    /// Passes when `measured ≥ bound - tolerance`.
    pub fn at_least(group: &str, name: &str, measured: f64, bound: f64, tolerance: f64, oracle: Oracle) -> Self {
        Self::build(group, name, measured >= bound - tolerance, measured, bound, tolerance, oracle)
    }

    /// Passes when `measured > bound`.
    pub fn above(group: &str, name: &str, measured: f64, bound: f64, oracle: Oracle) -> Self {
        Self::build(group, name, measured > bound, measured, bound, 0.0, oracle)
    }

    pub fn holds(group: &str, name: &str, pass: bool, oracle: Oracle) -> Self {
        let v = if pass { 1.0 } else { 0.0 };
        Self::build(group, name, pass, v, 1.0, 0.0, oracle)
    }

    /// A check that could not be evaluated.
    pub fn error(group: &str, name: &str, oracle: Oracle, err: impl std::fmt::Display) -> Self {
        Self::build(group, name, false, f64::NAN, f64::NAN, 0.0, oracle).with_detail(err.to_string())
    }

    pub fn skipped(group: &str, name: &str, reason: &str) -> Self {
        let mut c = Self::build(group, name, true, f64::NAN, f64::NAN, 0.0, Oracle::Structural);
        c.status = Status::Skipped;
        c.with_detail(reason)
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub seed: u64,
    pub overall: Status,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    /// Overall pass iff no check failed.
    pub fn new(scenario: &str, seed: u64, checks: Vec<Check>) -> Self {
        let overall = if checks.iter().all(Check::passed) {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            scenario: scenario.to_string(),
            seed,
            overall,
            checks,
        }
    }

    pub fn passed(&self) -> bool {
        self.overall == Status::Pass
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_ignores_skipped() {
        let r = VerificationReport::new(
            "t",
            0,
            vec![
                Check::at_most("g", "a", 1.0, 1.0, 0.0, Oracle::Analytic),
                Check::skipped("g", "b", "not applicable"),
            ],
        );
        assert!(r.passed());
        let r = VerificationReport::new("t", 0, vec![Check::at_least("g", "a", 0.5, 1.0, 0.1, Oracle::Analytic)]);
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
    }

    #[test]
    fn nan_never_passes() {
        assert!(!Check::at_most("g", "a", f64::NAN, 1.0, 0.0, Oracle::Analytic).passed());
        assert!(!Check::error("g", "a", Oracle::Analytic, "boom").passed());
    }
}
