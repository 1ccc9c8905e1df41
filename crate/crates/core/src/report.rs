//! Serialization of certification reports.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::certify::CertificationReport;

pub const SCHEMA_VERSION: u32 = 1;

/// Significant digits kept for floats in JSON output.
pub const JSON_DIGITS: usize = 15;

fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", JSON_DIGITS - 1, x).parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round_sig).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(m) => m.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Any serializable value as JSON with rounded floats, wrapped with a
/// `schema_version` field when it is an object.
pub fn to_json_value<T: Serialize>(value: &T) -> serde_json::Result<Value> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v);
    if let Value::Object(m) = v {
        let mut out = Map::new();
        out.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
        out.extend(m);
        v = Value::Object(out);
    }
    Ok(v)
}

pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    serde_json::to_string_pretty(&to_json_value(value)?)
}

/// Reads a report written by [`to_json`].
pub fn from_json(s: &str) -> serde_json::Result<CertificationReport> {
    let mut v: Value = serde_json::from_str(s)?;
    if let Value::Object(m) = &mut v {
        m.remove("schema_version");
    }
    serde_json::from_value(v)
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let items: Vec<String> = a.iter().map(scalar).collect();
            out.push((prefix.to_string(), format!("[{}]", items.join(", "))));
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        _ => out.push((prefix.to_string(), scalar(v))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        other => other.to_string(),
    }
}

/// One `key = value` line per leaf, with dotted keys.
pub fn to_text<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut rows = Vec::new();
    flatten("", &to_json_value(value)?, &mut rows);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut s = String::new();
    for (k, v) in rows {
        let _ = writeln!(s, "{k:<width$} = {v}");
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounding_keeps_fifteen_digits() {
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333333);
        assert_eq!(round_sig(-2.5e-300), -2.5e-300);
        assert_eq!(round_sig(0.0), 0.0);
    }

    #[test]
    fn json_is_versioned_and_text_is_flat() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            b: Vec<f64>,
            c: Option<f64>,
            d: Inner,
        }
        #[derive(Serialize)]
        struct Inner {
            x: &'static str,
        }
        let s = S { a: 0.1 + 0.2, b: vec![1.0, 2.0], c: None, d: Inner { x: "k" } };
        let v = to_json_value(&s).unwrap();
        assert_eq!(v, json!({"schema_version": 1, "a": 0.3, "b": [1.0, 2.0], "c": null, "d": {"x": "k"}}));
        let t = to_text(&s).unwrap();
        assert!(t.lines().any(|l| l.starts_with("d.x") && l.ends_with("= k")));
        assert!(t.lines().any(|l| l.starts_with("b ") && l.ends_with("= [1.0, 2.0]")));
        assert!(t.lines().any(|l| l.starts_with("c ") && l.ends_with("= none")));
    }
}
