//! Ordered key/value reports rendered as JSON or plain text.

use nalgebra::DMatrix;
use serde::ser::{Serialize, SerializeMap, Serializer};

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(untagged)]
pub enum Value {
    Null,
    Bool(bool),
    Int(usize),
    Num(f64),
    Str(String),
    List(Vec<f64>),
    Strs(Vec<String>),
    Matrix(Vec<Vec<f64>>),
}

/// Report entries in insertion order; the first entry is always `"command"`.
#[derive(Debug, Clone, Default)]
pub struct Report {
    entries: Vec<(String, Value)>,
}

impl Serialize for Report {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.entries.len()))?;
        for (k, v) in &self.entries {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut r = Self::default();
        r.str("command", command);
        r
    }

    fn push(&mut self, key: &str, v: Value) {
        self.entries.push((key.to_string(), v));
    }

    pub fn null(&mut self, key: &str) {
        self.push(key, Value::Null);
    }

    pub fn bool(&mut self, key: &str, v: bool) {
        self.push(key, Value::Bool(v));
    }

    pub fn int(&mut self, key: &str, v: usize) {
        self.push(key, Value::Int(v));
    }

    pub fn num(&mut self, key: &str, v: f64) {
        self.push(key, Value::Num(v));
    }

    pub fn str(&mut self, key: &str, v: &str) {
        self.push(key, Value::Str(v.to_string()));
    }

    pub fn list(&mut self, key: &str, v: &[f64]) {
        self.push(key, Value::List(v.to_vec()));
    }

    pub fn strs(&mut self, key: &str, v: &[String]) {
        self.push(key, Value::Strs(v.to_vec()));
    }

    pub fn matrix(&mut self, key: &str, m: &DMatrix<f64>) {
        self.push(key, Value::Matrix(phrobust::io::rows(m)));
    }

    pub fn to_json(&self) -> phrobust::Result<String> {
        phrobust::io::to_json(self)
    }

    pub fn to_text(&self) -> String {
        let num = |x: f64| if x.is_finite() { format!("{:.10e}", x + 0.0) } else { "nan".to_string() };
        let mut out = String::new();
        for (k, v) in &self.entries {
            let line = match v {
                Value::Null => "-".to_string(),
                Value::Bool(b) => b.to_string(),
                Value::Int(i) => i.to_string(),
                Value::Num(x) => num(*x),
                Value::Str(s) => s.clone(),
                Value::List(xs) => format!("[{}]", xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(", ")),
                Value::Strs(xs) => format!("[{}]", xs.join(", ")),
                Value::Matrix(rows) => {
                    let body: Vec<String> = rows
                        .iter()
                        .map(|r| format!("    [{}]", r.iter().map(|&x| num(x)).collect::<Vec<_>>().join(", ")))
                        .collect();
                    format!("\n{}", body.join("\n"))
                }
            };
            out.push_str(&format!("{k}: {line}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_keep_insertion_order() {
        let mut r = Report::new("check");
        r.num("z", 1.0);
        r.bool("a", true);
        r.null("m");
        let j = r.to_json().unwrap();
        let (c, z, a) = (j.find("command").unwrap(), j.find("\"z\"").unwrap(), j.find("\"a\"").unwrap());
        assert!(c < z && z < a);
        assert!(j.contains("1.0000000000000000e0"));
        assert!(r.to_text().starts_with("command: check\nz: 1.0000000000e0\na: true\nm: -\n"));
    }
}
