use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub name: String,
    pub measured: Value,
    pub bound: Value,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Record {
    /// `measured <= bound + tolerance`.
    pub fn at_most(name: &str, measured: f64, bound: f64, tolerance: f64) -> Self {
        Record {
            name: name.into(),
            measured: num(measured),
            bound: num(bound),
            tolerance,
            pass: measured.is_finite() && measured <= bound + tolerance,
            note: String::new(),
        }
    }

    pub fn flag(name: &str, measured: impl Into<Value>, bound: impl Into<Value>, pass: bool) -> Self {
        Record { name: name.into(), measured: measured.into(), bound: bound.into(), tolerance: 0.0, pass, note: String::new() }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// `measured - bound - tolerance` when numeric; used to rank failed attempts.
    pub fn excess(&self) -> f64 {
        match (self.measured.as_f64(), self.bound.as_f64()) {
            (Some(m), Some(b)) => (m - b - self.tolerance).max(0.0),
            _ if self.pass => 0.0,
            _ => 1.0,
        }
    }
}

fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or_else(|| Value::String(format!("{v}")), Value::Number)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub records: Vec<Record>,
    pub provenance: BTreeMap<String, String>,
    pub pass: bool,
}

impl Report {
    pub fn new(records: Vec<Record>) -> Self {
        let pass = records.iter().all(|r| r.pass);
        Report { records, provenance: BTreeMap::new(), pass }
    }

    pub fn push(&mut self, r: Record) {
        self.pass = self.pass && r.pass;
        self.records.push(r);
    }

    pub fn extend(&mut self, other: Report) {
        for r in other.records {
            self.push(r);
        }
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.provenance.insert(key.into(), value.to_string());
    }

    pub fn get(&self, name: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn failures(&self) -> Vec<&Record> {
        self.records.iter().filter(|r| !r.pass).collect()
    }

    pub fn score(&self) -> f64 {
        self.records.iter().map(Record::excess).sum()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.records {
            writeln!(f, "{:<5} {:<22} measured={} bound={} tol={}", if r.pass { "pass" } else { "FAIL" }, r.name, r.measured, r.bound, r.tolerance)?;
        }
        write!(f, "overall: {}", if self.pass { "pass" } else { "FAIL" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_pass_is_conjunction() {
        let mut r = Report::new(vec![Record::at_most("a", 0.1, 0.1, 0.0)]);
        assert!(r.pass);
        r.push(Record::at_most("b", 0.3, 0.1, 0.05));
        assert!(!r.pass);
        assert_eq!(r.failures().len(), 1);
        assert!((r.score() - 0.15).abs() < 1e-12);
        let back: Report = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
