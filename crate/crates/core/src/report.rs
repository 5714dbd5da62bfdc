//! Result records, manifests and JSON output.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num::BigRational;
use serde::Serialize;
use serde_json::Value;

use crate::error::Result;
use crate::mdd::format_rational;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Assertion {
            name: name.into(),
            status: if passed { Status::Pass } else { Status::Fail },
            detail: detail.into(),
        }
    }

    pub fn skipped(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Assertion {
            name: name.into(),
            status: Status::Skipped,
            detail: reason.into(),
        }
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<7} {}: {}", self.status, self.name, self.detail)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AssertionStatus {
    pub name: String,
    pub status: Status,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub config: BTreeMap<String, String>,
    pub lattices: Vec<Vec<usize>>,
    pub seeds: Vec<u64>,
    pub version: String,
    pub wall_time_s: f64,
    pub assertions: Vec<AssertionStatus>,
}

impl RunManifest {
    pub fn new(command_line: Vec<String>, config: BTreeMap<String, String>) -> Self {
        RunManifest {
            command_line,
            config,
            lattices: Vec::new(),
            seeds: Vec::new(),
            version: VERSION.to_string(),
            wall_time_s: 0.0,
            assertions: Vec::new(),
        }
    }

    pub fn record(&mut self, assertions: &[Assertion]) {
        self.assertions = assertions
            .iter()
            .map(|a| AssertionStatus {
                name: a.name.clone(),
                status: a.status,
            })
            .collect();
    }

    pub fn all_passed(&self) -> bool {
        self.assertions.iter().all(|a| a.status == Status::Pass)
    }
}

/// A result file: the payload plus the manifest that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct ResultFile {
    pub manifest: RunManifest,
    pub assertions: Vec<Assertion>,
    pub result: Value,
}

impl ResultFile {
    pub fn new(mut manifest: RunManifest, assertions: Vec<Assertion>, result: Value) -> Self {
        manifest.record(&assertions);
        ResultFile {
            manifest,
            assertions,
            result,
        }
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.status == Status::Pass)
    }

    pub fn failed(&self) -> bool {
        self.assertions.iter().any(|a| a.status == Status::Fail)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn human(&self) -> String {
        let mut out = String::new();
        for a in &self.assertions {
            out.push_str(&a.to_string());
            out.push('\n');
        }
        out
    }

    /// Writes `<stem>.json` and `<stem>.txt` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{stem}.json")), self.to_json()? + "\n")?;
        std::fs::write(dir.join(format!("{stem}.txt")), self.human())?;
        Ok(())
    }
}

/// `"p/q"`.
pub fn rational_value(r: &BigRational) -> Value {
    Value::String(format_rational(r))
}

pub fn rationals_value(rs: &[BigRational]) -> Value {
    Value::Array(rs.iter().map(rational_value).collect())
}
