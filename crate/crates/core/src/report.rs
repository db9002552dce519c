//! Versioned report documents.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "1";

/// A named check with the threshold it was held to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// How `value` is compared with `threshold`: `">="`, `"<="`, `">"`, `"=="`.
    pub relation: String,
    pub passed: bool,
}

impl Check {
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            relation: ">=".into(),
            passed: value >= threshold,
        }
    }

    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            relation: "<=".into(),
            passed: value <= threshold,
        }
    }

    pub fn flag(name: impl Into<String>, holds: bool) -> Self {
        Self {
            name: name.into(),
            value: if holds { 1.0 } else { 0.0 },
            threshold: 1.0,
            relation: "==".into(),
            passed: holds,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub grid_nodes: Option<usize>,
    pub r_min: Option<f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub wall_time_seconds: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Pass => 0,
            Self::Fail => 1,
            Self::Inconclusive => 2,
        }
    }

    /// The worse of two outcomes; inconclusive dominates failure.
    pub fn combine(self, other: Self) -> Self {
        use Outcome::*;
        match (self, other) {
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            (Fail, _) | (_, Fail) => Fail,
            _ => Pass,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: String,
    pub command: String,
    pub parameters: serde_json::Value,
    pub results: serde_json::Value,
    pub checks: Vec<Check>,
    pub outcome: Outcome,
    pub provenance: Provenance,
}

impl ReportDocument {
    pub fn new(command: impl Into<String>, parameters: serde_json::Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            command: command.into(),
            parameters,
            results: serde_json::Value::Null,
            checks: Vec::new(),
            outcome: Outcome::Pass,
            provenance: Provenance::default(),
        }
    }

    pub fn push_check(&mut self, c: Check) {
        if !c.passed {
            self.outcome = self.outcome.combine(Outcome::Fail);
        }
        self.checks.push(c);
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// Merges several documents into one whose results list the inputs in order.
    pub fn merge(docs: Vec<ReportDocument>) -> Self {
        let mut out = Self::new("report-merge", serde_json::json!({ "inputs": docs.len() }));
        let mut outcome = Outcome::Pass;
        let mut wall = 0.0;
        for d in &docs {
            outcome = outcome.combine(d.outcome);
            wall += d.provenance.wall_time_seconds;
            out.checks.extend(d.checks.iter().cloned());
        }
        out.outcome = outcome;
        out.provenance.wall_time_seconds = wall;
        out.results = serde_json::to_value(&docs).unwrap_or(serde_json::Value::Null);
        out
    }
}
