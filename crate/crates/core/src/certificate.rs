use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Anchor used for certificates that check artifact plumbing rather than a
/// mathematical claim.
pub const PLUMBING: &str = "plumbing";

/// Outcome of one verified inequality or claim.
///
/// `pass` can only be true when `margin > 0`; the constructor enforces it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub id: String,
    pub anchor: String,
    pub pass: bool,
    pub margin: f64,
    pub meta: BTreeMap<String, Value>,
}

impl Certificate {
    /// `checks_ok` carries every side condition other than the margin sign.
    pub fn new(id: impl Into<String>, anchor: impl Into<String>, margin: f64, checks_ok: bool) -> Self {
        let mut anchor = anchor.into();
        if anchor.is_empty() {
            anchor = PLUMBING.to_string();
        }
        Self {
            id: id.into(),
            anchor,
            pass: checks_ok && margin.is_finite() && margin > 0.0,
            margin: if margin.is_finite() { margin } else { f64::MIN },
            meta: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.insert(key, value);
        self
    }

    pub fn insert(&mut self, key: &str, value: impl Into<Value>) {
        // Non-finite floats become null in JSON.
        self.meta.insert(key.to_string(), value.into());
    }

    pub fn note(self, text: &str) -> Self {
        self.with("notes", text)
    }

    /// Marks the certificate failed and records why.
    pub fn fail(mut self, reason: &str) -> Self {
        self.pass = false;
        self.insert("failure", reason);
        self
    }

    pub fn meta_f64(&self, key: &str) -> Option<f64> {
        self.meta.get(key).and_then(Value::as_f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_requires_positive_margin() {
        assert!(Certificate::new("a", "x", 0.1, true).pass);
        assert!(!Certificate::new("a", "x", 0.0, true).pass);
        assert!(!Certificate::new("a", "x", -1.0, true).pass);
        assert!(!Certificate::new("a", "x", 1.0, false).pass);
        assert!(!Certificate::new("a", "x", f64::NAN, true).pass);
    }

    #[test]
    fn empty_anchor_becomes_plumbing() {
        assert_eq!(Certificate::new("a", "", 1.0, true).anchor, PLUMBING);
    }

    #[test]
    fn serializes_with_schema_fields_in_order() {
        let c = Certificate::new("id1", "claim", 0.5, true).with("grid", 1e-3);
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"{"id":"id1","anchor":"claim","pass":true,"margin":0.5,"meta":{"grid":0.001}}"#);
    }
}
