//! Deterministic rendering of reports: keys sorted, floats rounded to 12
//! significant digits.

use serde_json::{Number, Value};

pub const SIG_DIGITS: usize = 12;

pub fn round_float(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let r: f64 = format!("{:.*e}", SIG_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses");
    // no negative zero in reports
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Rounds every non-integer number in `value`.
pub fn normalize(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = round_float(n.as_f64().expect("f64 number"));
            Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(normalize).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, normalize(v))).collect())
        }
        other => other,
    }
}

pub fn to_json(value: Value) -> String {
    let mut s = serde_json::to_string_pretty(&normalize(value)).expect("serializable report");
    s.push('\n');
    s
}

/// One `path: value` line per scalar; arrays of scalars stay inline.
pub fn to_text(value: Value) -> String {
    let mut out = String::new();
    walk(&normalize(value), "", &mut out);
    out
}

fn walk(value: &Value, path: &str, out: &mut String) {
    let join = |key: &str| {
        if path.is_empty() {
            key.to_string()
        } else {
            format!("{path}.{key}")
        }
    };
    match value {
        Value::Object(map) if !map.is_empty() => {
            for (k, v) in map {
                walk(v, &join(k), out);
            }
        }
        Value::Array(items) if items.iter().any(|v| v.is_object() || v.is_array()) => {
            for (i, v) in items.iter().enumerate() {
                walk(v, &join(&i.to_string()), out);
            }
        }
        Value::String(s) => out.push_str(&format!("{path}: {s}\n")),
        other => out.push_str(&format!("{path}: {other}\n")),
    }
}
