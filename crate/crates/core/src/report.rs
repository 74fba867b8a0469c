//! Machine-readable analysis reports.

use crate::error::{Error, Result};
use crate::verdict::{ConditionVerdict, Verdict};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::Path;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `{tool_version, inputs, verdicts, artifacts}`. No timestamp, so identical
/// inputs give byte-identical documents.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Report {
    pub tool_version: String,
    pub inputs: BTreeMap<String, serde_json::Value>,
    pub verdicts: Vec<ConditionVerdict>,
    pub artifacts: Vec<String>,
}

impl Report {
    pub fn new() -> Self {
        Report { tool_version: TOOL_VERSION.to_string(), ..Default::default() }
    }

    pub fn input(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.inputs.insert(key.to_string(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
        self
    }

    pub fn push(&mut self, v: ConditionVerdict) -> &mut Self {
        self.verdicts.push(v);
        self
    }

    pub fn artifact(&mut self, path: impl Into<String>) -> &mut Self {
        self.artifacts.push(path.into());
        self
    }

    /// True when every verdict holds (vacuously for an empty report).
    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(|v| v.holds == Verdict::Holds)
    }
}

/// Pretty JSON with a trailing newline; non-finite numbers become `null`.
pub fn emit_report(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn write_report(path: &Path, report: &Report) -> Result<()> {
    std::fs::write(path, emit_report(report)).map_err(|e| Error::Io { path: path.display().to_string(), source: e })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_has_empty_verdicts() {
        let v: serde_json::Value = serde_json::from_str(&emit_report(&Report::new())).unwrap();
        assert_eq!(v["verdicts"], serde_json::json!([]));
        assert_eq!(v["tool_version"], TOOL_VERSION);
    }
}
