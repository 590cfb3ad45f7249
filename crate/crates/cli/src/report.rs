//! Deterministic JSON reports.

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use setinc_core::{Matrix, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub config: Map<String, Value>,
    pub instance_hash: Option<String>,
    pub result: Value,
}

impl Report {
    pub fn new(command: &str, instance_hash: Option<String>) -> Self {
        Self { command: command.to_owned(), config: Map::new(), instance_hash, result: Value::Null }
    }

    pub fn config(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.config.insert(key.to_owned(), value.into());
        self
    }

    pub fn to_value(&self) -> Value {
        json!({
            "command": self.command,
            "config": self.config,
            "provenance": {
                "library": "setinc-core",
                "version": setinc_core::VERSION,
                "instance_hash": self.instance_hash,
            },
            "result": self.result,
        })
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("reports serialize");
        s.push('\n');
        s
    }
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn vec_json(v: &Vector) -> Value {
    Value::from(v.as_slice().to_vec())
}

pub fn mat_json(m: &Matrix) -> Value {
    Value::from(crate::problem_file::rows_from_matrix(m))
}

/// Non-finite reals become strings (`"inf"`, `"-inf"`, `"nan"`).
pub fn real(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else if x.is_nan() {
        Value::from("nan")
    } else if x > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_sorted_and_newline_terminated() {
        let r = Report::new("eval", Some("ab".into())).config("seed", 3).config("alpha", 1.5);
        let s = r.to_json();
        assert!(s.ends_with("}\n"));
        let order: Vec<usize> = ["\"command\"", "\"config\"", "\"provenance\"", "\"result\""]
            .iter()
            .map(|k| s.find(k).unwrap())
            .collect();
        assert!(order.windows(2).all(|w| w[0] < w[1]));
        assert!(s.find("\"alpha\"").unwrap() < s.find("\"seed\"").unwrap());
        assert!(s.contains(setinc_core::VERSION));
    }

    #[test]
    fn non_finite_reals() {
        assert_eq!(real(f64::INFINITY), Value::from("inf"));
        assert_eq!(real(f64::NEG_INFINITY), Value::from("-inf"));
        assert_eq!(real(f64::NAN), Value::from("nan"));
        assert_eq!(real(0.5), Value::from(0.5));
    }

    #[test]
    fn sha256_of_empty_string() {
        assert_eq!(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
