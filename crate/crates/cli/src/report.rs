use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "holds")]
    Holds,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relation: Option<Relation>,
    /// Name of the tolerance the value is compared against.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<String>,
    /// Threshold actually applied, already scaled where the tolerance is relative.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: &str, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: value <= threshold,
            value: Some(value),
            relation: Some(Relation::AtMost),
            tolerance: Some(tolerance.into()),
            threshold: Some(threshold),
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, tolerance: &str, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: value >= threshold,
            value: Some(value),
            relation: Some(Relation::AtLeast),
            tolerance: Some(tolerance.into()),
            threshold: Some(threshold),
        }
    }

    pub fn holds(name: impl Into<String>, passed: bool) -> Self {
        Self { name: name.into(), passed, value: None, relation: Some(Relation::Holds), tolerance: None, threshold: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// Result of one run. Everything except `timings` is a pure function of the config.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub input: Value,
    pub tolerances: BTreeMap<String, f64>,
    pub statistics: BTreeMap<String, Value>,
    pub results: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub passed: bool,
    #[serde(skip)]
    pub tables: Vec<Table>,
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(command: &str, input: Value, tolerances: BTreeMap<String, f64>) -> Self {
        Self {
            command: command.into(),
            input,
            tolerances,
            statistics: BTreeMap::new(),
            results: BTreeMap::new(),
            checks: Vec::new(),
            passed: true,
            tables: Vec::new(),
            timings: BTreeMap::new(),
        }
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    pub fn stat(&mut self, name: &str, value: impl Serialize) {
        self.statistics.insert(name.into(), serde_json::to_value(value).expect("serializable statistic"));
    }

    pub fn result(&mut self, name: &str, value: impl Serialize) {
        self.results.insert(name.into(), serde_json::to_value(value).expect("serializable result"));
    }

    pub fn check(&mut self, c: Check) {
        self.passed &= c.passed;
        self.checks.push(c);
    }

    pub fn time(&mut self, name: &str, d: Duration) {
        self.timings.insert(name.into(), d.as_secs_f64());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The JSON document without wall-clock timings.
    pub fn to_json_without_timings(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Value::Object(map) = &mut v {
            map.remove("timings");
        }
        serde_json::to_string_pretty(&v).expect("report serializes")
    }

    /// Writes `report.json` and one CSV per table into `dir`.
    pub fn write(&self, dir: &Path) -> CliResult<()> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.to_path_buf(), source: e })?;
        let path = dir.join("report.json");
        std::fs::write(&path, self.to_json()).map_err(|e| CliError::Io { path: path.clone(), source: e })?;
        for t in &self.tables {
            let path = dir.join(format!("{}.csv", t.name));
            std::fs::write(&path, t.to_csv()).map_err(|e| CliError::Io { path: path.clone(), source: e })?;
        }
        Ok(())
    }
}
