//! Pass/fail reporting shared by the verification suites.

use serde::{Deserialize, Serialize};

/// One verified identity: a name, the outcome, and on failure a witness
/// (typically the smallest failing index together with both sides).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl CheckResult {
    pub fn pass(name: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            pass: true,
            witness: None,
        }
    }

    pub fn fail(name: impl Into<String>, witness: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            pass: false,
            witness: Some(witness.into()),
        }
    }

    pub fn from_eq<T: PartialEq + std::fmt::Display>(
        name: impl Into<String>,
        lhs: &T,
        rhs: &T,
    ) -> Self {
        if lhs == rhs {
            CheckResult::pass(name)
        } else {
            CheckResult::fail(name, format!("lhs = {} ; rhs = {}", lhs, rhs))
        }
    }
}

/// A named batch of checks, serialized as
/// `{"suite":..., "p":..., "bound":..., "checks":[...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub p: u32,
    pub bound: usize,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, p: u32, bound: usize) -> Self {
        SuiteReport {
            suite: suite.into(),
            p,
            bound,
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: CheckResult) {
        self.checks.push(check);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Canonical ordering so that parallel evaluation never changes output.
    pub fn canonicalize(&mut self) {
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
    }
}
