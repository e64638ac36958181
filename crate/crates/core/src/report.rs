//! Verification reports shared by the library verifiers and the CLI.

use serde::Serialize;
use serde_json::Value;
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub check_id: String,
    pub params: BTreeMap<String, Value>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Check {
    pub fn new(check_id: &str, verdict: Verdict) -> Check {
        Check { check_id: check_id.to_string(), params: BTreeMap::new(), verdict, values: BTreeMap::new(), witness: None }
    }

    /// Pass when `witness` is `None`, otherwise fail with that witness.
    pub fn from_witness(check_id: &str, witness: Option<String>) -> Check {
        let verdict = if witness.is_some() { Verdict::Fail } else { Verdict::Pass };
        Check { witness, ..Check::new(check_id, verdict) }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Check {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn value(mut self, key: &str, value: impl Into<Value>) -> Check {
        self.values.insert(key.to_string(), value.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new() -> Report {
        Report::default()
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    /// True when no check failed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed())
    }

    pub fn find(&self, check_id: &str) -> impl Iterator<Item = &Check> {
        let id = check_id.to_string();
        self.checks.iter().filter(move |c| c.check_id == id)
    }
}
