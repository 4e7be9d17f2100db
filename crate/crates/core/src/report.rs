//! Named verification outcomes.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Comparison asserted by a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

/// How `tolerance` is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TolKind {
    /// Scaled by `max(1, |rhs|)`.
    Rel,
    /// Added as is (Monte Carlo bands).
    Abs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub tol_kind: TolKind,
    pub pass: bool,
    /// `lhs` and `rhs` agree within tolerance (reported for inequalities too).
    pub equality: bool,
    pub inputs_digest: String,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckReport {
    /// Build a report and evaluate `pass` from the relation.
    pub fn new(
        name: impl Into<String>,
        lhs: f64,
        relation: Relation,
        rhs: f64,
        tolerance: f64,
        tol_kind: TolKind,
    ) -> Self {
        let slack = match tol_kind {
            TolKind::Rel => tolerance * rhs.abs().max(1.0),
            TolKind::Abs => tolerance,
        };
        let equality = (lhs - rhs).abs() <= slack;
        let pass = lhs.is_finite()
            && rhs.is_finite()
            && match relation {
                Relation::Le => lhs <= rhs + slack,
                Relation::Ge => lhs + slack >= rhs,
                Relation::Eq => equality,
            };
        CheckReport {
            name: name.into(),
            lhs,
            rhs,
            relation,
            tolerance,
            tol_kind,
            pass,
            equality,
            inputs_digest: String::new(),
            seed: None,
            samples: None,
            notes: Vec::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_samples(mut self, samples: u64) -> Self {
        self.samples = Some(samples);
        self
    }

    pub fn with_digest<T: Serialize + ?Sized>(mut self, inputs: &T) -> Self {
        self.inputs_digest = digest(inputs);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// Force a failure (e.g. violated hypothesis) without touching values.
    pub fn fail(mut self, why: impl Into<String>) -> Self {
        self.pass = false;
        self.notes.push(why.into());
        self
    }

    pub fn summary_line(&self) -> String {
        format!(
            "[{}] {}: {:.12} {} {:.12} (tol {:e} {:?})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.lhs,
            self.relation.symbol(),
            self.rhs,
            self.tolerance,
            self.tol_kind
        )
    }
}

/// First 16 hex digits of the SHA-256 of the inputs' JSON encoding.
pub fn digest<T: Serialize + ?Sized>(inputs: &T) -> String {
    let bytes = serde_json::to_vec(inputs).unwrap_or_default();
    let hash = Sha256::digest(&bytes);
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relation_semantics() {
        assert!(CheckReport::new("a", 1.0, Relation::Le, 2.0, 0.0, TolKind::Abs).pass);
        assert!(!CheckReport::new("b", 2.1, Relation::Le, 2.0, 0.05, TolKind::Abs).pass);
        assert!(CheckReport::new("c", 2.0 + 1e-8, Relation::Eq, 2.0, 1e-7, TolKind::Rel).pass);
        let ge = CheckReport::new("d", 9.0, Relation::Ge, 8.0, 1e-9, TolKind::Rel);
        assert!(ge.pass && !ge.equality);
    }

    #[test]
    fn nan_never_passes() {
        assert!(!CheckReport::new("n", f64::NAN, Relation::Le, 1.0, 1.0, TolKind::Abs).pass);
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(digest(&[1, 2, 3]), digest(&[1, 2, 3]));
        assert_eq!(digest("x").len(), 16);
    }
}
