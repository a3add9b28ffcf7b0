//! Byte-stable JSON: sorted keys, two-space indent, floats with 17
//! significant digits.

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};

pub fn to_value<S: Serialize>(v: &S) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| CliError::Config(format!("serialization failed: {e}")))
}

pub fn to_canonical_string(v: &Value) -> String {
    let mut out = String::new();
    write(v, 0, &mut out);
    out.push('\n');
    out
}

pub fn format_float(f: f64) -> String {
    format!("{f:.16e}")
}

fn write(v: &Value, indent: usize, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else {
                out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(indent + 2, out);
                write(item, indent + 2, out);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(indent + 2, out);
                out.push_str(&serde_json::to_string(k).expect("string serializes"));
                out.push_str(": ");
                write(&map[k.as_str()], indent + 2, out);
                if i + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push('}');
        }
    }
}

fn pad(n: usize, out: &mut String) {
    out.extend(std::iter::repeat_n(' ', n));
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn sorted_and_fixed_precision() {
        let v = json!({"b": 0.1, "a": [1, -2, true, null], "c": {"z": "x\"y", "y": {}}});
        let s = to_canonical_string(&v);
        assert_eq!(
            s,
            "{\n  \"a\": [\n    1,\n    -2,\n    true,\n    null\n  ],\n  \"b\": 1.0000000000000001e-1,\n  \"c\": {\n    \"y\": {},\n    \"z\": \"x\\\"y\"\n  }\n}\n"
        );
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn floats_round_trip() {
        for f in [std::f64::consts::PI, -1e-300, 1e300, 0.0, 2.5, 1.0 / 3.0] {
            let s = format_float(f);
            assert_eq!(s.parse::<f64>().unwrap(), f, "{s}");
        }
    }
}
