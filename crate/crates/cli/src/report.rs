use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use teamcontract::Instance;

/// JSON number, or the strings `"inf"`, `"-inf"`, `"nan"` where JSON has none.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

/// Inverse of [`num`].
pub fn read_num(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => match s.as_str() {
            "inf" => Some(f64::INFINITY),
            "-inf" => Some(f64::NEG_INFINITY),
            "nan" => Some(f64::NAN),
            _ => None,
        },
        _ => None,
    }
}

/// SHA-256 of the compact instance JSON.
pub fn digest(inst: &Instance) -> String {
    let text = serde_json::to_string(&inst.to_json()).expect("instances are plain JSON");
    hex::encode(Sha256::digest(text.as_bytes()))
}
