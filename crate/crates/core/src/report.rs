//! Machine-readable verification reports.
//!
//! A report is one JSON document: the task, the frequency vector, a `checks`
//! array of asserted properties and a free-form `data` map of measurements.
//! Maps are `BTreeMap`s so serialisation order, and hence the bytes, depend
//! only on the inputs.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::algebra::LambdaSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Passes when `residual ≤ tolerance`.
    AtMost,
    /// Passes when `residual ≥ tolerance`.
    AtLeast,
}

/// One asserted property.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// The mathematical statement being checked.
    pub anchor: String,
    pub residual: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, anchor: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            residual,
            tolerance,
            bound: Bound::AtMost,
            pass: residual <= tolerance,
        }
    }

    pub fn at_least(name: impl Into<String>, anchor: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            residual,
            tolerance,
            bound: Bound::AtLeast,
            pass: residual >= tolerance,
        }
    }

    /// Exact comparison of two counts; the residual is `|found − expected|`.
    pub fn equal(name: impl Into<String>, anchor: impl Into<String>, found: usize, expected: usize) -> Self {
        Self::at_most(name, anchor, found.abs_diff(expected) as f64, 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub task: String,
    pub lambda: Vec<f64>,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub data: BTreeMap<String, Value>,
}

impl Report {
    pub fn new(task: impl Into<String>, spec: &LambdaSpec) -> Self {
        Self { task: task.into(), lambda: spec.lambdas().to_vec(), pass: true, checks: Vec::new(), data: BTreeMap::new() }
    }

    pub fn check(&mut self, check: Check) -> &mut Self {
        self.pass &= check.pass;
        self.checks.push(check);
        self
    }

    /// Records a measurement. Values that fail to serialise are stored as `null`.
    pub fn insert(&mut self, key: impl Into<String>, value: impl Serialize) -> &mut Self {
        self.data.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    /// Moves the checks of `other` into `self`, prefixing names, and its data under `prefix`.
    pub fn absorb(&mut self, prefix: &str, other: Report) {
        for mut c in other.checks {
            c.name = format!("{prefix}.{}", c.name);
            self.check(c);
        }
        self.data.insert(prefix.to_string(), serde_json::to_value(other.data).unwrap_or(Value::Null));
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_tracks_checks() {
        let spec = LambdaSpec::new(vec![1.0]).unwrap();
        let mut r = Report::new("t", &spec);
        r.check(Check::at_most("a", "x", 1e-14, 1e-12));
        assert!(r.pass);
        r.check(Check::at_least("b", "y", 1e-4, 1e-3));
        assert!(!r.pass);
        assert_eq!(r.failed().count(), 1);
        r.check(Check::at_most("nan", "z", f64::NAN, 1.0));
        assert_eq!(r.failed().count(), 2);
    }

    #[test]
    fn json_is_ordered() {
        let spec = LambdaSpec::new(vec![1.0, 2.0]).unwrap();
        let mut r = Report::new("t", &spec);
        r.insert("zeta", 1).insert("alpha", 2);
        let j = r.to_json();
        assert!(j.find("alpha").unwrap() < j.find("zeta").unwrap());
        assert!(j.contains("\"checks\": []"));
        r.check(Check::equal("dim", "d", 3, 3));
        assert!(r.checks[0].pass);
    }
}
