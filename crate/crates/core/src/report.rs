//! Machine-readable check reports.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// How `measured` is compared against `tolerance`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Below,
    Above,
    Between { low: f64, high: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    /// What the check reproduces, in words.
    pub anchor: String,
    pub measured: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl Check {
    /// Passes iff `measured < tolerance`.
    pub fn below(id: &str, anchor: &str, measured: f64, tolerance: f64) -> Self {
        Self::build(id, anchor, measured, tolerance, Relation::Below, measured < tolerance)
    }

    /// Passes iff `measured > tolerance`.
    pub fn above(id: &str, anchor: &str, measured: f64, tolerance: f64) -> Self {
        Self::build(id, anchor, measured, tolerance, Relation::Above, measured > tolerance)
    }

    /// Passes iff `low ≤ measured ≤ high`; `tolerance` records the half-width.
    pub fn between(id: &str, anchor: &str, measured: f64, low: f64, high: f64) -> Self {
        let pass = (low..=high).contains(&measured);
        Self::build(id, anchor, measured, (high - low) / 2.0, Relation::Between { low, high }, pass)
    }

    /// Records a boolean outcome as `measured ∈ {0, 1}`.
    pub fn holds(id: &str, anchor: &str, ok: bool) -> Self {
        Self::build(id, anchor, if ok { 1.0 } else { 0.0 }, 0.5, Relation::Above, ok)
    }

    fn build(id: &str, anchor: &str, measured: f64, tolerance: f64, relation: Relation, pass: bool) -> Self {
        Self { id: id.into(), anchor: anchor.into(), measured, tolerance, relation, pass: pass && measured.is_finite() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
    /// Suite-specific payload (states, sequences, curves).
    #[serde(default)]
    pub details: serde_json::Value,
}

/// Wall-clock data, kept apart from the report so reports stay reproducible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub suite: String,
    pub wall_seconds: f64,
}

impl SuiteReport {
    pub fn new(suite: &str, seed: u64) -> Self {
        Self { suite: suite.into(), seed, checks: Vec::new(), pass: true, details: serde_json::Value::Null }
    }

    pub fn push(&mut self, check: Check) -> &mut Self {
        self.pass &= check.pass;
        self.checks.push(check);
        self
    }

    pub fn with_details(mut self, details: serde_json::Value) -> Self {
        self.details = details;
        self
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes `<suite>.json` and `<suite>.timing.json` into `dir`.
    pub fn write(&self, dir: &Path, wall_seconds: f64) -> std::io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.json", self.suite));
        let json = self.to_json().map_err(std::io::Error::other)?;
        fs::write(&path, json + "\n")?;
        let timing = Timing { suite: self.suite.clone(), wall_seconds };
        let timing = serde_json::to_string_pretty(&timing).map_err(std::io::Error::other)?;
        fs::write(dir.join(format!("{}.timing.json", self.suite)), timing + "\n")?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_pass_tracks_checks() {
        let mut r = SuiteReport::new("t", 0);
        r.push(Check::below("a", "x", 1e-13, 1e-12));
        assert!(r.pass);
        r.push(Check::above("b", "y", 0.0, 0.01));
        assert!(!r.pass);
        assert_eq!(r.failed().count(), 1);
    }

    #[test]
    fn nan_never_passes() {
        assert!(!Check::below("a", "x", f64::NAN, 1.0).pass);
        assert!(!Check::between("a", "x", f64::NAN, 0.0, 1.0).pass);
    }

    #[test]
    fn json_round_trip() {
        let mut r = SuiteReport::new("t", 3);
        r.push(Check::between("ratio", "first order", 2.0, 1.8, 2.2));
        let back: SuiteReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
