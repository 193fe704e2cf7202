//! Verification reports shared by every identity and inequality check.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Outcome of one identity or inequality check.
///
/// `lhs`/`rhs` follow the orientation of the checked relation
/// (`lhs >= rhs` for inequalities, `lhs == rhs` for identities). Extra
/// scalars go in `diagnostics`, keyed by name, so serialization order is
/// stable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub diagnostics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    /// `lhs >= rhs - slack`.
    pub fn inequality(name: impl Into<String>, lhs: f64, rhs: f64, slack: f64) -> Self {
        let gap = lhs - rhs;
        VerificationReport {
            name: name.into(),
            lhs,
            rhs,
            gap,
            tolerance: slack,
            passed: gap.is_finite() && gap >= -slack,
            diagnostics: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    /// `|lhs - rhs| <= rel * |rhs|`.
    pub fn identity(name: impl Into<String>, lhs: f64, rhs: f64, rel: f64) -> Self {
        let gap = lhs - rhs;
        let rel_err = relative_error(lhs, rhs);
        VerificationReport {
            name: name.into(),
            lhs,
            rhs,
            gap,
            tolerance: rel,
            passed: rel_err <= rel,
            diagnostics: BTreeMap::from([("rel_err".to_string(), rel_err)]),
            notes: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    /// Tighten the verdict with an additional condition.
    pub fn require(mut self, ok: bool, why: impl Into<String>) -> Self {
        if !ok {
            self.passed = false;
            self.notes.push(why.into());
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.diagnostics.get(key).copied()
    }
}

/// `|a - b| / |b|`, falling back to the absolute error when `b == 0`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if b == 0.0 {
        d
    } else {
        d / b.abs()
    }
}
