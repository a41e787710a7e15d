//! JSON summaries, checks and hashed artifacts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

use super::{Expectation, Tolerances};

/// Version of the summary layout.
pub const SCHEMA_VERSION: &str = "1";

/// One asserted tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    /// "<=" or ">="
    pub comparison: &'static str,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, tolerance, comparison: "<=", passed: value <= tolerance }
    }

    pub fn at_least(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, tolerance, comparison: ">=", passed: value >= tolerance }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    /// a falsification scenario whose checks failed, as designed
    ExpectedFail,
    /// a falsification scenario whose checks all passed
    UnexpectedPass,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass | Outcome::ExpectedFail => 0,
            Outcome::Fail | Outcome::UnexpectedPass => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::ExpectedFail => "FAIL-as-designed",
            Outcome::UnexpectedPass => "UNEXPECTED-PASS",
        }
    }
}

/// Settings shared by every subcommand.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub allow_incompatible: bool,
}

/// Summary written as `summary.json` next to the CSV series.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub tool_version: &'static str,
    pub scenario: String,
    pub command: String,
    pub seed: u64,
    pub expect: Expectation,
    pub outcome: Outcome,
    pub tolerances: Tolerances,
    pub checks: Vec<Check>,
    /// file name → sha256 of its bytes
    pub artifacts: BTreeMap<String, String>,
    pub details: serde_json::Value,
    #[serde(skip)]
    dir: PathBuf,
}

impl Report {
    pub fn new(scenario: &str, command: &str, seed: u64, expect: Expectation, tolerances: Tolerances, dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Report {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            scenario: scenario.to_string(),
            command: command.to_string(),
            seed,
            expect,
            outcome: Outcome::Pass,
            tolerances,
            checks: Vec::new(),
            artifacts: BTreeMap::new(),
            details: serde_json::Value::Object(Default::default()),
            dir: dir.to_path_buf(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        if let serde_json::Value::Object(m) = &mut self.details {
            m.insert(key.to_string(), v);
        }
    }

    /// Write bytes under the output directory and record their hash.
    pub fn artifact(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.artifacts.insert(name.to_string(), hex::encode(Sha256::digest(bytes)));
        Ok(())
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Settle the outcome against the expectation and write `summary.json`.
    pub fn finish(mut self) -> Result<Self> {
        let passed = self.all_passed();
        self.outcome = match (self.expect, passed) {
            (Expectation::Pass, true) => Outcome::Pass,
            (Expectation::Pass, false) => Outcome::Fail,
            (Expectation::Fail, false) => Outcome::ExpectedFail,
            (Expectation::Fail, true) => Outcome::UnexpectedPass,
        };
        let text = serde_json::to_string_pretty(&self).map_err(|e| crate::error::Error::Numeric(e.to_string()))?;
        std::fs::write(self.dir.join("summary.json"), text + "\n")?;
        Ok(self)
    }

    /// One line per check for the terminal.
    pub fn render(&self) -> String {
        let mut s = format!("{} {}: {}\n", self.command, self.scenario, self.outcome.label());
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            s.push_str(&format!("  [{mark}] {:<48} {:>12.4e} {} {:.1e}\n", c.name, c.value, c.comparison, c.tolerance));
        }
        s
    }
}
