//! Structured check results.

use serde::{Deserialize, Serialize};

/// Outcome of one verification or diagnostic check.
///
/// `passed` holds exactly when `|measured - reference|` (absolute, or
/// divided by `max(|reference|, floor)` when `relative`) is at most
/// `tolerance`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub measured: f64,
    pub reference: f64,
    pub tolerance: f64,
    /// Relative (vs `reference`) or absolute comparison.
    pub relative: bool,
    pub passed: bool,
    /// Parameter snapshot and auxiliary numbers.
    pub context: serde_json::Value,
}

impl Report {
    pub fn check(
        name: impl Into<String>,
        measured: f64,
        reference: f64,
        tolerance: f64,
        relative: bool,
        context: serde_json::Value,
    ) -> Self {
        let err = if relative {
            (measured - reference).abs() / reference.abs().max(f64::MIN_POSITIVE)
        } else {
            (measured - reference).abs()
        };
        Report {
            name: name.into(),
            measured,
            reference,
            tolerance,
            relative,
            passed: err.is_finite() && err <= tolerance,
            context,
        }
    }

    /// A bound-style check: passes when `measured <= bound`.
    pub fn bound(
        name: impl Into<String>,
        measured: f64,
        bound: f64,
        context: serde_json::Value,
    ) -> Self {
        Report {
            name: name.into(),
            measured,
            reference: bound,
            tolerance: 0.0,
            relative: false,
            passed: measured.is_finite() && measured <= bound,
            context,
        }
    }

    pub fn error(&self) -> f64 {
        if self.relative {
            (self.measured - self.reference).abs() / self.reference.abs().max(f64::MIN_POSITIVE)
        } else {
            (self.measured - self.reference).abs()
        }
    }
}
