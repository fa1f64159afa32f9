// SPDX-License-Identifier: Apache-2.0

//! Typed value nodes.
//!
//! A value is a byte string tagged with a type label. The network understands
//! a small closed registry of types; any other tag is carried through
//! untouched so that newer peers can introduce types without breaking older
//! ones.

use std::fmt;

use crate::label::Label;

/// Fixed registry labels for the understood value types.
pub mod registry {
    use crate::label::Label;

    pub const UTF8_STRING: Label = Label::from_u128(0x6773_0001_0000_4000_8000_0000_0000_0001);
    pub const BYTES: Label = Label::from_u128(0x6773_0001_0000_4000_8000_0000_0000_0002);
    pub const INT64: Label = Label::from_u128(0x6773_0001_0000_4000_8000_0000_0000_0003);
    pub const FLOAT64: Label = Label::from_u128(0x6773_0001_0000_4000_8000_0000_0000_0004);
    pub const TIMESTAMP: Label = Label::from_u128(0x6773_0001_0000_4000_8000_0000_0000_0005);
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ValueType {
    Utf8String,
    Bytes,
    Int64,
    Float64,
    /// Microseconds since the Unix epoch.
    Timestamp,
    /// A tag outside the registry, preserved opaquely.
    Unknown(Label),
}

impl ValueType {
    pub const KNOWN: [ValueType; 5] = [
        ValueType::Utf8String,
        ValueType::Bytes,
        ValueType::Int64,
        ValueType::Float64,
        ValueType::Timestamp,
    ];

    pub fn from_label(label: Label) -> Self {
        match label {
            registry::UTF8_STRING => ValueType::Utf8String,
            registry::BYTES => ValueType::Bytes,
            registry::INT64 => ValueType::Int64,
            registry::FLOAT64 => ValueType::Float64,
            registry::TIMESTAMP => ValueType::Timestamp,
            other => ValueType::Unknown(other),
        }
    }

    pub fn label(self) -> Label {
        match self {
            ValueType::Utf8String => registry::UTF8_STRING,
            ValueType::Bytes => registry::BYTES,
            ValueType::Int64 => registry::INT64,
            ValueType::Float64 => registry::FLOAT64,
            ValueType::Timestamp => registry::TIMESTAMP,
            ValueType::Unknown(l) => l,
        }
    }

    /// Name used in the JSON text form.
    pub fn name(self) -> Option<&'static str> {
        match self {
            ValueType::Utf8String => Some("utf8-string"),
            ValueType::Bytes => Some("bytes"),
            ValueType::Int64 => Some("int64"),
            ValueType::Float64 => Some("float64"),
            ValueType::Timestamp => Some("timestamp"),
            ValueType::Unknown(_) => None,
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        ValueType::KNOWN.into_iter().find(|t| t.name() == Some(name))
    }

    /// Required payload width, for the fixed-width types.
    pub fn fixed_width(self) -> Option<usize> {
        match self {
            ValueType::Int64 | ValueType::Float64 | ValueType::Timestamp => Some(8),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValueError {
    #[error("{ty:?} payload must be {expected} bytes, got {actual}")]
    Width { ty: ValueType, expected: usize, actual: usize },
    #[error("utf8-string payload is not valid UTF-8")]
    Utf8,
    #[error("payload of {0} bytes exceeds the 32-bit length field")]
    TooLong(usize),
}

/// A typed value node. Always valid for its type once constructed.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value {
    ty: ValueType,
    payload: Vec<u8>,
}

impl Value {
    pub fn new(ty: ValueType, payload: Vec<u8>) -> Result<Self, ValueError> {
        if payload.len() > u32::MAX as usize {
            return Err(ValueError::TooLong(payload.len()));
        }
        if let Some(w) = ty.fixed_width() {
            if payload.len() != w {
                return Err(ValueError::Width { ty, expected: w, actual: payload.len() });
            }
        }
        if ty == ValueType::Utf8String && std::str::from_utf8(&payload).is_err() {
            return Err(ValueError::Utf8);
        }
        Ok(Value { ty, payload })
    }

    pub fn utf8(s: impl Into<String>) -> Self {
        Value { ty: ValueType::Utf8String, payload: s.into().into_bytes() }
    }

    pub fn bytes(b: impl Into<Vec<u8>>) -> Self {
        Value { ty: ValueType::Bytes, payload: b.into() }
    }

    pub fn int64(v: i64) -> Self {
        Value { ty: ValueType::Int64, payload: v.to_be_bytes().to_vec() }
    }

    pub fn float64(v: f64) -> Self {
        Value { ty: ValueType::Float64, payload: v.to_be_bytes().to_vec() }
    }

    pub fn timestamp(micros: i64) -> Self {
        Value { ty: ValueType::Timestamp, payload: micros.to_be_bytes().to_vec() }
    }

    pub fn value_type(&self) -> ValueType {
        self.ty
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    pub fn as_str(&self) -> Option<&str> {
        match self.ty {
            ValueType::Utf8String => std::str::from_utf8(&self.payload).ok(),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self.ty {
            ValueType::Int64 | ValueType::Timestamp => {
                Some(i64::from_be_bytes(self.payload.as_slice().try_into().ok()?))
            }
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self.ty {
            ValueType::Float64 => Some(f64::from_be_bytes(self.payload.as_slice().try_into().ok()?)),
            _ => None,
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ty {
            ValueType::Utf8String => write!(f, "{:?}", self.as_str().unwrap_or_default()),
            ValueType::Int64 => write!(f, "{}i64", self.as_i64().unwrap_or_default()),
            ValueType::Float64 => write!(f, "{}f64", self.as_f64().unwrap_or_default()),
            ValueType::Timestamp => write!(f, "@{}", self.as_i64().unwrap_or_default()),
            ValueType::Bytes => write!(f, "bytes({})", self.payload.len()),
            ValueType::Unknown(l) => write!(f, "opaque({l}, {} bytes)", self.payload.len()),
        }
    }
}
