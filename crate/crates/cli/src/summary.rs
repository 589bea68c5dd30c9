//! What a command produced: assertions, constants and CSV tables.

use std::collections::BTreeMap;

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Default)]
pub struct Outcome {
    pub params: BTreeMap<String, serde_json::Value>,
    pub assertions: Vec<Assertion>,
    pub constants: BTreeMap<String, f64>,
    /// `(file name, contents)`.
    pub tables: Vec<(String, String)>,
}

impl Outcome {
    pub fn param(&mut self, key: &str, value: impl Serialize) {
        self.params.insert(
            key.to_string(),
            serde_json::to_value(value).expect("plain values serialize"),
        );
    }

    pub fn constant(&mut self, key: &str, value: f64) {
        self.constants.insert(key.to_string(), value);
    }

    pub fn at_most(&mut self, name: &str, value: f64, threshold: f64) {
        self.push(name, value <= threshold, value, threshold);
    }

    pub fn at_least(&mut self, name: &str, value: f64, threshold: f64) {
        self.push(name, value >= threshold, value, threshold);
    }

    /// `|value - target| ≤ tol`, reported as the deviation.
    pub fn near(&mut self, name: &str, value: f64, target: f64, tol: f64) {
        let dev = (value - target).abs();
        self.push(name, dev <= tol, dev, tol);
    }

    fn push(&mut self, name: &str, pass: bool, value: f64, threshold: f64) {
        self.assertions.push(Assertion {
            name: name.to_string(),
            pass: pass && value.is_finite(),
            value,
            threshold,
        });
    }

    pub fn table(&mut self, file: &str, contents: String) {
        self.tables.push((file.to_string(), contents));
    }

    pub fn pass(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }
}

#[derive(Serialize)]
pub struct Summary<'a> {
    pub command: &'a str,
    pub params: &'a BTreeMap<String, serde_json::Value>,
    pub assertions: &'a [Assertion],
    pub constants: &'a BTreeMap<String, f64>,
    pub error: Option<String>,
    pub wall_time_s: f64,
    pub pass: bool,
}
