//! Pass/fail reports with witnesses and measured quantities.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// Cap on stored witnesses per check; the count is kept separately.
pub const WITNESS_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<usize> for Metric {
    fn from(v: usize) -> Self {
        Metric::Int(v as i64)
    }
}

impl From<u64> for Metric {
    fn from(v: u64) -> Self {
        Metric::Int(i64::try_from(v).unwrap_or(i64::MAX))
    }
}

impl From<i64> for Metric {
    fn from(v: i64) -> Self {
        Metric::Int(v)
    }
}

impl From<f64> for Metric {
    fn from(v: f64) -> Self {
        Metric::Float(v)
    }
}

impl From<&str> for Metric {
    fn from(v: &str) -> Self {
        Metric::Text(v.to_string())
    }
}

impl From<String> for Metric {
    fn from(v: String) -> Self {
        Metric::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub witnesses: Vec<String>,
    pub violations: usize,
    pub metrics: Vec<(String, Metric)>,
}

impl Check {
    pub fn new(name: &str) -> Self {
        Check {
            name: name.to_string(),
            passed: true,
            witnesses: Vec::new(),
            violations: 0,
            metrics: Vec::new(),
        }
    }

    /// Records a violation; only the first [`WITNESS_LIMIT`] witnesses are kept.
    pub fn fail(&mut self, witness: String) {
        self.passed = false;
        self.violations += 1;
        if self.witnesses.len() < WITNESS_LIMIT {
            self.witnesses.push(witness);
        }
    }

    pub fn metric(&mut self, key: &str, value: impl Into<Metric>) {
        self.metrics.push((key.to_string(), value.into()));
    }

    pub fn with_metric(mut self, key: &str, value: impl Into<Metric>) -> Self {
        self.metric(key, value);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Witnesses of every failed check, prefixed by the check name.
    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .flat_map(|c| c.witnesses.iter().map(move |w| alloc::format!("{}: {}", c.name, w)))
            .collect()
    }
}
