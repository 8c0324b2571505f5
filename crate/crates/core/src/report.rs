//! Report rendering. Every report is a serde value shown either as
//! `key: value` lines or as a JSON document. Nested keys are joined with
//! dots and arrays of scalars are printed on one line.

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;

pub fn to_value<T: Serialize>(report: &T) -> Result<Value> {
    Ok(serde_json::to_value(report)?)
}

/// Pretty JSON with a trailing newline.
pub fn render_json(value: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn render_text(value: &Value) -> String {
    let mut out = String::new();
    flatten("", value, &mut out);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("none".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut String) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(items) => {
            let scalars: Option<Vec<String>> = items.iter().map(scalar).collect();
            match scalars {
                Some(list) => out.push_str(&format!("{prefix}: [{}]\n", list.join(" "))),
                None => {
                    for (i, v) in items.iter().enumerate() {
                        flatten(&key(&i.to_string()), v, out);
                    }
                }
            }
        }
        other => out.push_str(&format!("{prefix}: {}\n", scalar(other).unwrap_or_default())),
    }
}

/// Least-squares slope of `ln y` against `ln n`.
pub fn fit_exponent(n: &[f64], y: &[f64]) -> Option<f64> {
    if n.len() != y.len() || n.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = n.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    slope.is_finite().then_some(slope)
}
