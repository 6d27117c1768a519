//! Verification reports and JSON helpers.

use serde::{Serialize, Serializer};
use serde_json::Value;

pub(crate) fn ser_f64_ext<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    crate::ext::ExtReal::from(*x).serialize(s)
}

/// Outcome of checking one identity at one parameter point.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub claim: String,
    pub params: Value,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub meta: Value,
}

impl VerificationReport {
    /// Report comparing `lhs` with `rhs`; passes when `|lhs - rhs| ≤ tolerance`.
    pub fn compare(claim: impl Into<String>, params: Value, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let abs_gap = (lhs - rhs).abs();
        let rel_gap = abs_gap / rhs.abs().max(f64::MIN_POSITIVE);
        VerificationReport {
            claim: claim.into(),
            params,
            lhs,
            rhs,
            abs_gap,
            rel_gap,
            tolerance,
            pass: abs_gap <= tolerance,
            meta: Value::Null,
        }
    }

    pub fn with_meta(mut self, meta: Value) -> Self {
        self.meta = meta;
        self
    }

    pub fn with_pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }

    /// One JSON line.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}
