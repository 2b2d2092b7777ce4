//! Model files and JSON output.
//!
//! A model file is a JSON object `{"n", "m", "A", "B", "C", "D"}` with row-major real
//! matrices. Unknown keys are rejected. Output floats carry 17 significant digits.

use crate::error::{Error, Result};
use crate::model::StateSpaceModel;
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{Map, Value};
use std::io::{self, Write};
use std::path::Path;

const KEYS: [&str; 6] = ["n", "m", "A", "B", "C", "D"];

fn is_complex_like(v: &Value) -> bool {
    match v {
        Value::Object(o) => o.contains_key("re") || o.contains_key("im") || o.contains_key("real"),
        Value::String(s) => {
            let t = s.trim();
            t.ends_with('i') || t.ends_with('j')
        }
        Value::Array(a) => a.len() == 2 && a.iter().all(Value::is_number),
        _ => false,
    }
}

fn dim(obj: &Map<String, Value>, key: &str) -> Result<usize> {
    let v = obj.get(key).ok_or_else(|| Error::Parse(format!("missing key \"{key}\"")))?;
    v.as_u64().map(|x| x as usize).ok_or_else(|| Error::Parse(format!("\"{key}\" must be a nonnegative integer")))
}

fn matrix(obj: &Map<String, Value>, key: &str, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
    let v = obj.get(key).ok_or_else(|| Error::Parse(format!("missing key \"{key}\"")))?;
    let outer = v.as_array().ok_or_else(|| Error::Parse(format!("\"{key}\" must be an array of rows")))?;
    if outer.len() != rows {
        return Err(Error::DimensionMismatch(format!("{key} has {} rows, expected {rows}", outer.len())));
    }
    let mut m = DMatrix::zeros(rows, cols);
    for (i, row) in outer.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| Error::Parse(format!("{key}[{i}] must be an array")))?;
        if row.len() != cols {
            return Err(Error::DimensionMismatch(format!("{key}[{i}] has {} entries, expected {cols}", row.len())));
        }
        for (j, e) in row.iter().enumerate() {
            m[(i, j)] = match e {
                Value::Number(x) => {
                    x.as_f64().ok_or_else(|| Error::Parse(format!("{key}[{i}][{j}] is not a 64-bit float")))?
                }
                other if is_complex_like(other) => {
                    return Err(Error::ComplexNotSupported(format!("{key}[{i}][{j}]")));
                }
                _ => return Err(Error::Parse(format!("{key}[{i}][{j}] must be a number"))),
            };
        }
    }
    Ok(m)
}

/// Parses a model document.
pub fn parse_model(text: &str) -> Result<StateSpaceModel<f64>> {
    let v: Value = serde_json::from_str(text)?;
    let obj = v.as_object().ok_or_else(|| Error::Parse("model file must be a JSON object".into()))?;
    if let Some(k) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(Error::Parse(format!("unknown key \"{k}\"")));
    }
    let n = dim(obj, "n")?;
    let m = dim(obj, "m")?;
    if n == 0 || m == 0 {
        return Err(Error::DimensionMismatch("n and m must be positive".into()));
    }
    StateSpaceModel::new(
        matrix(obj, "A", n, n)?,
        matrix(obj, "B", n, m)?,
        matrix(obj, "C", m, n)?,
        matrix(obj, "D", m, m)?,
    )
}

pub fn load_model(path: impl AsRef<Path>) -> Result<StateSpaceModel<f64>> {
    let text = std::fs::read_to_string(path)?;
    parse_model(&text)
}

/// Row-major nested vectors.
pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

#[derive(Serialize)]
struct ModelDoc {
    n: usize,
    m: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    d: Vec<Vec<f64>>,
}

pub fn model_to_json(model: &StateSpaceModel<f64>) -> Result<String> {
    to_json(&ModelDoc {
        n: model.n(),
        m: model.m(),
        a: rows(&model.a),
        b: rows(&model.b),
        c: rows(&model.c),
        d: rows(&model.d),
    })
}

pub fn write_model(path: impl AsRef<Path>, model: &StateSpaceModel<f64>) -> Result<()> {
    let mut s = model_to_json(model)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

/// Pretty JSON with every float written as `{:.16e}`.
pub struct PreciseFormatter {
    inner: PrettyFormatter<'static>,
}

impl Default for PreciseFormatter {
    fn default() -> Self {
        Self { inner: PrettyFormatter::new() }
    }
}

impl Formatter for PreciseFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        // `+ 0.0` maps -0 to 0.
        write!(w, "{:.16e}", value + 0.0)
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{:.16e}", f64::from(value) + 0.0)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn end_object_key<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_key(w)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Serializes `value` with [`PreciseFormatter`]. Non-finite floats become `null`.
pub fn to_json<S: Serialize>(value: &S) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter::default());
    value.serialize(&mut ser)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}
