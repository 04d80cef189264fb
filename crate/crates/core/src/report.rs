//! Verification records and the JSON-lines report.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

/// One check: what was tested, the identity it exercises, and the outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    /// Short statement of the identity being checked.
    pub anchor: String,
    pub status: Status,
    /// Inputs and both sides on failure; extra data for info records.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub info: usize,
}

/// Append-only list of checks for one run.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub config: Value,
    pub checks: Vec<Check>,
    pub artifacts: BTreeMap<String, String>,
}

impl Report {
    pub fn new(config: Value) -> Self {
        Report {
            config,
            ..Default::default()
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Record a pass/fail outcome.
    pub fn check(
        &mut self,
        suite: &str,
        name: impl Into<String>,
        anchor: &str,
        ok: bool,
        witness: Option<Value>,
        started: Instant,
    ) -> bool {
        self.push(Check {
            suite: suite.into(),
            name: name.into(),
            anchor: anchor.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            witness: if ok { None } else { witness },
            elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        });
        ok
    }

    pub fn info(&mut self, suite: &str, name: impl Into<String>, anchor: &str, data: Value) {
        self.push(Check {
            suite: suite.into(),
            name: name.into(),
            anchor: anchor.into(),
            status: Status::Info,
            witness: Some(data),
            elapsed_ms: 0.0,
        });
    }

    pub fn merge(&mut self, other: Report) {
        self.checks.extend(other.checks);
        self.artifacts.extend(other.artifacts);
    }

    pub fn summary(&self) -> Summary {
        let mut s = Summary::default();
        for c in &self.checks {
            match c.status {
                Status::Pass => s.pass += 1,
                Status::Fail => s.fail += 1,
                Status::Info => s.info += 1,
            }
        }
        s
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn passed(&self) -> bool {
        self.summary().fail == 0
    }

    /// JSON lines: a config header, one line per check, then the summary.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        out.push_str(&serde_json::to_string(&serde_json::json!({ "config": self.config }))?);
        out.push('\n');
        for c in &self.checks {
            out.push_str(&serde_json::to_string(c)?);
            out.push('\n');
        }
        let tail = serde_json::json!({ "summary": self.summary(), "artifacts": self.artifacts });
        out.push_str(&serde_json::to_string(&tail)?);
        out.push('\n');
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_jsonl()?.as_bytes())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_counts_and_jsonl_shape() {
        let mut r = Report::new(serde_json::json!({"algebra": "sl3"}));
        let t = Instant::now();
        r.check("lie", "a", "x", true, None, t);
        r.check("lie", "b", "x", false, Some(serde_json::json!({"lhs": 1})), t);
        r.info("lie", "c", "x", serde_json::json!(3));
        assert_eq!(r.summary(), Summary { pass: 1, fail: 1, info: 1 });
        let text = r.to_jsonl().unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        for l in lines {
            serde_json::from_str::<Value>(l).unwrap();
        }
        assert!(!r.passed());
    }
}
