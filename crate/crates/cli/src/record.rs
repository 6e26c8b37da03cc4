//! Result records and their CSV / JSON encodings.

use std::io::{self, Write};

use serde_json::{Map, Number, Value as Json};

/// Significant digits for floating-point CSV fields.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Self::Float(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Self::Int(x as i64)
    }
}

impl From<u32> for Value {
    fn from(x: u32) -> Self {
        Self::Int(x as i64)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Self::Int(x as i64)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Self::Bool(x)
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Self::Text(x.to_string())
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Self::Text(x)
    }
}

/// Ordered field list; later inserts of an existing key overwrite it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record {
    fields: Vec<(String, Value)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        let value = value.into();
        match self.fields.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.fields.push((key.to_string(), value)),
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn float(&self, key: &str) -> Option<f64> {
        match self.get(key)? {
            Value::Float(x) => Some(*x),
            Value::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().map(|(k, _)| k.as_str())
    }

    pub fn to_json(&self) -> Json {
        let mut map = Map::new();
        for (k, v) in &self.fields {
            let j = match v {
                Value::Float(x) => Number::from_f64(*x).map(Json::Number).unwrap_or(Json::Null),
                Value::Int(i) => Json::from(*i),
                Value::Bool(b) => Json::Bool(*b),
                Value::Text(s) => Json::String(s.clone()),
            };
            map.insert(k.clone(), j);
        }
        Json::Object(map)
    }
}

/// Decimal rendering with `digits` significant digits, trailing zeros
/// dropped; scientific notation outside `1e-6 ..= 1e16`.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-6..16).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Float(x) => format_significant(*x, SIGNIFICANT_DIGITS),
        Value::Int(i) => i.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::Text(s) => s.clone(),
    }
}

/// Header is the union of all keys in first-seen order; missing cells
/// are left empty.
pub fn write_csv(out: &mut dyn Write, records: &[Record]) -> io::Result<()> {
    let mut header: Vec<&str> = Vec::new();
    for r in records {
        for k in r.keys() {
            if !header.contains(&k) {
                header.push(k);
            }
        }
    }
    writeln!(out, "{}", header.join(","))?;
    for r in records {
        let row: Vec<String> = header.iter().map(|k| r.get(k).map(csv_cell).unwrap_or_default()).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// One JSON object per line.
pub fn write_json(out: &mut dyn Write, records: &[Record]) -> io::Result<()> {
    for r in records {
        writeln!(out, "{}", r.to_json())?;
    }
    Ok(())
}
