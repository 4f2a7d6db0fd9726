//! Machine-readable verdicts shared by every check.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::exactnum::{BigRational, RationalInterval};
use crate::polyring::{MultiPoly, PolyJson};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Verified,
    Holds,
    Fails,
    ResidualNonzero,
    CoefficientNegative,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Indeterminate,
}

impl Status {
    pub fn outcome(self) -> Outcome {
        match self {
            Status::Verified | Status::Holds => Outcome::Pass,
            Status::Fails | Status::ResidualNonzero | Status::CoefficientNegative => Outcome::Fail,
            Status::Indeterminate => Outcome::Indeterminate,
        }
    }

    pub fn is_pass(self) -> bool {
        self.outcome() == Outcome::Pass
    }
}

/// Size of the quantity whose sign decides a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Margin {
    Exact(String),
    Enclosure { lo: String, hi: String },
    Float { value: f64, tolerance: f64 },
}

impl Margin {
    pub fn exact(q: &BigRational) -> Self {
        Margin::Exact(q.to_string())
    }

    pub fn enclosure(iv: &RationalInterval) -> Self {
        Margin::Enclosure {
            lo: iv.lo().to_string(),
            hi: iv.hi().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub at: String,
    pub value: String,
}

/// One grid point of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointVerdict {
    pub index: usize,
    pub z: String,
    pub status: Status,
    pub margin: Margin,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sqrt_width: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub subject: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<Margin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<PolyJson>,
    /// A polynomial produced by the check (e.g. an expansion).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<PolyJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<Witness>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<PointVerdict>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

impl CheckReport {
    pub fn new(check: impl Into<String>, status: Status) -> Self {
        Self {
            check: check.into(),
            status,
            subject: BTreeMap::new(),
            margin: None,
            residual: None,
            polynomial: None,
            witnesses: Vec::new(),
            points: Vec::new(),
            notes: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.subject.insert(key.to_string(), value.to_string());
        self
    }

    pub fn with_margin(mut self, margin: Margin) -> Self {
        self.margin = Some(margin);
        self
    }

    pub fn with_residual(mut self, residual: &MultiPoly) -> Self {
        self.residual = Some(residual.to_json());
        self
    }

    pub fn with_polynomial(mut self, p: &MultiPoly) -> Self {
        self.polynomial = Some(p.to_json());
        self
    }

    pub fn with_witness(mut self, at: impl Into<String>, value: impl ToString) -> Self {
        self.witnesses.push(Witness {
            at: at.into(),
            value: value.to_string(),
        });
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn outcome(&self) -> Outcome {
        self.status.outcome()
    }
}

/// Worst outcome wins: any failure fails, otherwise any indeterminate.
pub fn combine(statuses: impl IntoIterator<Item = Status>, pass: Status) -> Status {
    let mut out = pass;
    for s in statuses {
        match s.outcome() {
            Outcome::Fail => return s,
            Outcome::Indeterminate => out = Status::Indeterminate,
            Outcome::Pass => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_mapping() {
        assert_eq!(Status::Verified.outcome(), Outcome::Pass);
        assert_eq!(Status::ResidualNonzero.outcome(), Outcome::Fail);
        assert_eq!(combine([Status::Holds, Status::Indeterminate], Status::Holds), Status::Indeterminate);
        assert_eq!(combine([Status::Indeterminate, Status::Fails], Status::Holds), Status::Fails);
        assert_eq!(combine([], Status::Verified), Status::Verified);
    }

    #[test]
    fn serializes_compactly() {
        let r = CheckReport::new("demo", Status::Holds).with("m2", 1).with_margin(Margin::Exact("1/2".into()));
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(
            text,
            r#"{"check":"demo","status":"holds","subject":{"m2":"1"},"margin":{"exact":"1/2"}}"#
        );
        let back: CheckReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
