//! Check records and JSON reports shared by the CLI and the acceptance suite.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Whether the tolerance bounds the residual from above or below.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bound {
    #[default]
    Upper,
    Lower,
}

/// One residual against its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub suite: String,
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    #[serde(default)]
    pub bound: Bound,
    pub passed: bool,
    /// Which oracle produced the comparison value.
    pub oracle: String,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl CheckRecord {
    /// Passes iff residual ≤ tolerance (NaN fails).
    pub fn at_most(suite: &str, name: &str, residual: f64, tolerance: f64, oracle: &str) -> Self {
        Self {
            suite: suite.into(),
            name: name.into(),
            residual,
            tolerance,
            bound: Bound::Upper,
            passed: residual <= tolerance,
            oracle: oracle.into(),
            details: Value::Null,
        }
    }

    /// Passes iff value ≥ threshold; used for mutation tests and decay factors.
    pub fn at_least(suite: &str, name: &str, value: f64, threshold: f64, oracle: &str) -> Self {
        Self { passed: value >= threshold, bound: Bound::Lower, ..Self::at_most(suite, name, value, threshold, oracle) }
    }

    /// How far the check is from its bound: above 1 fails.
    pub fn margin(&self) -> f64 {
        match self.bound {
            Bound::Upper => self.residual / self.tolerance,
            Bound::Lower => self.tolerance / self.residual,
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub command: String,
    pub config: Value,
    pub checks: Vec<CheckRecord>,
    /// Wall-clock seconds per suite; the only field that varies between runs.
    pub timing: Vec<(String, f64)>,
}

impl Report {
    pub fn new(command: &str, config: Value) -> Self {
        Self {
            version: format!("moment-core {}", env!("CARGO_PKG_VERSION")),
            command: command.into(),
            config,
            checks: Vec::new(),
            timing: Vec::new(),
        }
    }

    pub fn push(&mut self, check: CheckRecord) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = CheckRecord>) {
        self.checks.extend(checks);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Appends one JSON line per check to `<dir>/<command>.jsonl`.
    pub fn append_jsonl(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let mut f = OpenOptions::new().create(true).append(true).open(dir.join(format!("{}.jsonl", self.command)))?;
        for c in &self.checks {
            let line = serde_json::json!({ "version": self.version, "command": self.command, "config": self.config, "check": c });
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_rules() {
        assert!(CheckRecord::at_most("s", "a", 1e-12, 1e-10, "o").passed);
        assert!(!CheckRecord::at_most("s", "a", f64::NAN, 1e-10, "o").passed);
        assert!(CheckRecord::at_least("s", "m", 0.5, 1e-2, "o").passed);
        assert!(!CheckRecord::at_least("s", "m", 1e-3, 1e-2, "o").passed);
    }

    #[test]
    fn round_trip() {
        let mut r = Report::new("identities", serde_json::json!({ "q": 3 }));
        r.push(CheckRecord::at_most("s", "a", 1e-12, 1e-10, "o").with_details(serde_json::json!({ "n": 1 })));
        let back: Report = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back.checks, r.checks);
        assert!(back.all_passed());
    }
}
