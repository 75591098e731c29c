//! Named residuals with bounds and pass flags.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `None` for informational entries that never fail.
    pub bound: Option<f64>,
    pub pass: bool,
    /// Where the bound comes from (default tolerance, task override, derived constant...).
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass: true,
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn push(&mut self, c: Check) -> &mut Self {
        self.pass &= c.pass;
        self.checks.push(c);
        self
    }

    /// Passes when `value ≤ bound` (NaN fails).
    pub fn check_le(
        &mut self,
        name: impl Into<String>,
        value: f64,
        bound: f64,
        provenance: impl Into<String>,
    ) -> &mut Self {
        let pass = value <= bound;
        self.push(Check {
            name: name.into(),
            value,
            bound: Some(bound),
            pass,
            provenance: provenance.into(),
        })
    }

    /// Passes when `value < bound`.
    pub fn check_lt(
        &mut self,
        name: impl Into<String>,
        value: f64,
        bound: f64,
        provenance: impl Into<String>,
    ) -> &mut Self {
        let pass = value < bound;
        self.push(Check {
            name: name.into(),
            value,
            bound: Some(bound),
            pass,
            provenance: provenance.into(),
        })
    }

    /// Passes when `value ≥ bound`.
    pub fn check_ge(
        &mut self,
        name: impl Into<String>,
        value: f64,
        bound: f64,
        provenance: impl Into<String>,
    ) -> &mut Self {
        let pass = value >= bound;
        self.push(Check {
            name: name.into(),
            value,
            bound: Some(bound),
            pass,
            provenance: provenance.into(),
        })
    }

    pub fn check_flag(&mut self, name: impl Into<String>, ok: bool) -> &mut Self {
        self.push(Check {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            bound: None,
            pass: ok,
            provenance: "predicate".into(),
        })
    }

    pub fn info(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.push(Check {
            name: name.into(),
            value,
            bound: None,
            pass: true,
            provenance: "informational".into(),
        })
    }

    pub fn note(&mut self, s: impl Into<String>) -> &mut Self {
        self.notes.push(s.into());
        self
    }

    pub fn merge(&mut self, prefix: &str, other: VerificationReport) -> &mut Self {
        for mut c in other.checks {
            c.name = format!("{prefix}{}", c.name);
            self.push(c);
        }
        self.notes.extend(other.notes);
        self
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.value)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    /// `name,value,bound,pass,provenance` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("name,value,bound,pass,provenance\n");
        for c in &self.checks {
            let bound = c.bound.map(|b| format!("{b:e}")).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{:e},{},{},{}",
                c.name, c.value, bound, c.pass, c.provenance
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_is_conjunction() {
        let mut r = VerificationReport::new("x");
        r.check_le("a", 1.0, 2.0, "test").info("b", 5.0);
        assert!(r.pass);
        r.check_le("c", f64::NAN, 1.0, "test");
        assert!(!r.pass);
        assert_eq!(r.failures().len(), 1);
        assert!(r.to_csv().lines().count() == 4);
    }
}
