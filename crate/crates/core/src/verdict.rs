use std::collections::BTreeMap;
use std::fmt;

/// Direction of a checked inequality `lhs (>= | <=) rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    AtLeast,
    AtMost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    /// The hypothesis of the checked statement is not met by the input.
    NotApplicable,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::NotApplicable => "n/a",
        })
    }
}

/// Result of checking one inequality on concrete data.
///
/// `margin` is the signed slack: `lhs - rhs` for [`Relation::AtLeast`] and
/// `rhs - lhs` for [`Relation::AtMost`], so that the check passes exactly
/// when `margin >= -quad_error`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub margin: f64,
    pub quad_error: f64,
    pub outcome: Outcome,
    pub params: BTreeMap<String, f64>,
    /// Sub-checks of a chained statement.
    pub parts: Vec<StabilityVerdict>,
    pub note: Option<String>,
}

impl StabilityVerdict {
    pub fn check(name: impl Into<String>, lhs: f64, relation: Relation, rhs: f64, quad_error: f64) -> Self {
        let margin = match relation {
            Relation::AtLeast => lhs - rhs,
            Relation::AtMost => rhs - lhs,
        };
        let quad_error = quad_error.abs();
        let outcome = if margin >= -quad_error { Outcome::Pass } else { Outcome::Fail };
        StabilityVerdict {
            name: name.into(),
            lhs,
            rhs,
            relation,
            margin,
            quad_error,
            outcome,
            params: BTreeMap::new(),
            parts: Vec::new(),
            note: None,
        }
    }

    pub fn not_applicable(name: impl Into<String>, reason: impl Into<String>) -> Self {
        StabilityVerdict {
            name: name.into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            relation: Relation::AtLeast,
            margin: f64::NAN,
            quad_error: 0.0,
            outcome: Outcome::NotApplicable,
            params: BTreeMap::new(),
            parts: Vec::new(),
            note: Some(reason.into()),
        }
    }

    /// Combines sub-checks: fails if any part fails, passes if all pass.
    pub fn chain(name: impl Into<String>, parts: Vec<StabilityVerdict>) -> Self {
        let outcome = if parts.iter().any(|p| p.outcome == Outcome::Fail) {
            Outcome::Fail
        } else if parts.iter().all(|p| p.outcome == Outcome::NotApplicable) {
            Outcome::NotApplicable
        } else {
            Outcome::Pass
        };
        let worst = parts
            .iter()
            .filter(|p| p.outcome != Outcome::NotApplicable)
            .min_by(|a, b| (a.margin + a.quad_error).total_cmp(&(b.margin + b.quad_error)));
        let (lhs, rhs, relation, margin, quad_error) = match worst {
            Some(w) => (w.lhs, w.rhs, w.relation, w.margin, w.quad_error),
            None => (f64::NAN, f64::NAN, Relation::AtLeast, f64::NAN, 0.0),
        };
        StabilityVerdict {
            name: name.into(),
            lhs,
            rhs,
            relation,
            margin,
            quad_error,
            outcome,
            params: BTreeMap::new(),
            parts,
            note: None,
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    /// `lhs / rhs`, the quantity reported by ratio-type checks.
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

/// Value of a deficit functional with the pieces entering it.
#[derive(Debug, Clone, PartialEq)]
pub struct DeficitReport {
    pub value: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub norms_used: BTreeMap<String, f64>,
    pub quad_error: f64,
}

impl DeficitReport {
    pub fn new(lhs: f64, rhs: f64, quad_error: f64) -> Self {
        DeficitReport { value: lhs - rhs, lhs, rhs, norms_used: BTreeMap::new(), quad_error: quad_error.abs() }
    }

    pub fn with_norm(mut self, key: &str, value: f64) -> Self {
        self.norms_used.insert(key.to_string(), value);
        self
    }

    /// `value >= -quad_error`.
    pub fn is_nonnegative(&self) -> bool {
        self.value >= -self.quad_error
    }

    pub fn norm(&self, key: &str) -> Option<f64> {
        self.norms_used.get(key).copied()
    }
}
