// SPDX-License-Identifier: Apache-2.0

//! JSON text form of tuples, one object per line in `.jsonl` files.
//!
//! ```json
//! {"s":"…","p":"…","o":"…","c":"…","ts":1000}
//! {"s":"…","p":"…","o":{"type":"utf8-string","data":"Lab A"},"c":"…","ts":1000}
//! ```
//!
//! `bytes` values carry base64 data; numeric types carry JSON numbers.
//! Values with an unregistered type label are written as
//! `{"type":"<uuid>","data":"<base64>"}`. Signed tuples add `"signer"` and
//! a base64 `"sig"`.

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde_json::{json, Map, Value as Json};

use crate::label::Label;
use crate::tuple::{make_tuple, NodeRef, Tuple};
use crate::value::{Value, ValueType};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TextError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("field {0:?} is missing")]
    Missing(&'static str),
    #[error("field {field:?}: {reason}")]
    Field { field: &'static str, reason: String },
    #[error("line {line}: {source}")]
    Line { line: usize, source: Box<TextError> },
}

fn field_err(field: &'static str, reason: impl Into<String>) -> TextError {
    TextError::Field { field, reason: reason.into() }
}

pub fn value_to_json(v: &Value) -> Json {
    let data = match v.value_type() {
        ValueType::Utf8String => json!(v.as_str().unwrap_or_default()),
        ValueType::Int64 | ValueType::Timestamp => json!(v.as_i64()),
        ValueType::Float64 => json!(v.as_f64()),
        ValueType::Bytes | ValueType::Unknown(_) => json!(B64.encode(v.payload())),
    };
    let ty = match v.value_type().name() {
        Some(n) => n.to_owned(),
        None => v.value_type().label().to_string(),
    };
    json!({ "type": ty, "data": data })
}

pub fn value_from_json(j: &Json) -> Result<Value, TextError> {
    let obj = j.as_object().ok_or_else(|| field_err("o", "expected a UUID string or value object"))?;
    let ty_name = obj.get("type").and_then(Json::as_str).ok_or(TextError::Missing("o.type"))?;
    let data = obj.get("data").ok_or(TextError::Missing("o.data"))?;
    let ty = match ValueType::from_name(ty_name) {
        Some(t) => t,
        None => ValueType::Unknown(
            ty_name.parse::<Label>().map_err(|_| field_err("o.type", format!("unknown type {ty_name:?}")))?,
        ),
    };
    let bad = |what: &str| field_err("o.data", format!("expected {what}"));
    match ty {
        ValueType::Utf8String => Ok(Value::utf8(data.as_str().ok_or_else(|| bad("a string"))?)),
        ValueType::Int64 => Ok(Value::int64(data.as_i64().ok_or_else(|| bad("an integer"))?)),
        ValueType::Timestamp => Ok(Value::timestamp(data.as_i64().ok_or_else(|| bad("an integer"))?)),
        ValueType::Float64 => Ok(Value::float64(data.as_f64().ok_or_else(|| bad("a number"))?)),
        ValueType::Bytes | ValueType::Unknown(_) => {
            let raw = B64.decode(data.as_str().ok_or_else(|| bad("base64"))?).map_err(|_| bad("base64"))?;
            Value::new(ty, raw).map_err(|e| field_err("o.data", e.to_string()))
        }
    }
}

pub fn node_to_json(n: &NodeRef) -> Json {
    match n {
        NodeRef::Vertex(l) => json!(l),
        NodeRef::Value(v) => value_to_json(v),
    }
}

pub fn tuple_to_json(t: &Tuple) -> Json {
    let mut m = Map::new();
    m.insert("s".into(), json!(t.subject()));
    m.insert("p".into(), json!(t.predicate()));
    m.insert("o".into(), node_to_json(t.object()));
    m.insert("c".into(), json!(t.context()));
    m.insert("ts".into(), json!(t.timestamp()));
    if let (Some(signer), Some(sig)) = (t.signer(), t.signature()) {
        m.insert("signer".into(), json!(signer));
        m.insert("sig".into(), json!(B64.encode(sig)));
    }
    Json::Object(m)
}

fn label_field(obj: &Map<String, Json>, key: &'static str) -> Result<Label, TextError> {
    obj.get(key)
        .ok_or(TextError::Missing(key))?
        .as_str()
        .ok_or_else(|| field_err(key, "expected a UUID string"))?
        .parse()
        .map_err(|e: crate::label::ParseLabelError| field_err(key, e.to_string()))
}

pub fn tuple_from_json(j: &Json) -> Result<Tuple, TextError> {
    let obj = j.as_object().ok_or_else(|| TextError::Json("expected a JSON object".into()))?;
    let s = label_field(obj, "s")?;
    let p = label_field(obj, "p")?;
    let c = label_field(obj, "c")?;
    let o = match obj.get("o").ok_or(TextError::Missing("o"))? {
        Json::String(_) => NodeRef::Vertex(label_field(obj, "o")?),
        other => NodeRef::Value(value_from_json(other)?),
    };
    let ts = obj
        .get("ts")
        .ok_or(TextError::Missing("ts"))?
        .as_u64()
        .ok_or_else(|| field_err("ts", "expected a non-negative integer"))?;
    let t = make_tuple(s, p, o, c, ts).map_err(|e| field_err("o", e.to_string()))?;
    match (obj.get("signer"), obj.get("sig")) {
        (None, None) => Ok(t),
        (Some(_), Some(sig)) => {
            let signer = label_field(obj, "signer")?;
            let sig: [u8; 64] = sig
                .as_str()
                .and_then(|s| B64.decode(s).ok())
                .and_then(|b| b.try_into().ok())
                .ok_or_else(|| field_err("sig", "expected 64 bytes of base64"))?;
            Ok(t.with_provenance(signer, sig))
        }
        (Some(_), None) => Err(TextError::Missing("sig")),
        (None, Some(_)) => Err(TextError::Missing("signer")),
    }
}

pub fn parse_line(line: &str) -> Result<Tuple, TextError> {
    let j: Json = serde_json::from_str(line).map_err(|e| TextError::Json(e.to_string()))?;
    tuple_from_json(&j)
}

/// Parse a `.jsonl` document. Blank lines are skipped; each line's result is
/// reported separately so callers can proceed past bad lines.
pub fn parse_jsonl(doc: &str) -> Vec<(usize, Result<Tuple, TextError>)> {
    doc.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let line = i + 1;
            (line, parse_line(l).map_err(|e| TextError::Line { line, source: Box::new(e) }))
        })
        .collect()
}
