// SPDX-License-Identifier: Apache-2.0

//! Canonical packet encoding of tuples.
//!
//! Layout (all integers big-endian):
//!
//! ```text
//! offset size  field
//!      0    2  magic "GS" (0x47 0x53)
//!      2    1  version (0x01)
//!      3    1  flags: bit0 object-is-value, bit1 signer-present, bits 2..7 zero
//!      4   16  subject
//!     20   16  predicate
//!     36   16  object label, or value type label when bit0 is set
//!     52   16  context
//!     68    8  timestamp (micros since epoch)
//!     76   16  signer                      (only when bit1 is set)
//!      .    4  payload length (0 for label objects)
//!      .    n  payload
//!      .   64  signature                   (only when bit1 is set)
//! ```
//!
//! The header is fixed width; the zero-length payload of a label-object tuple
//! is the "non-value" encoding. The signature covers every byte before it.

use sha2::{Digest, Sha256};

use crate::label::Label;
use crate::tuple::{NodeRef, Signature, Tuple};
use crate::value::{Value, ValueError, ValueType};

pub const MAGIC: [u8; 2] = [0x47, 0x53];
pub const VERSION: u8 = 0x01;

pub const FLAG_OBJECT_IS_VALUE: u8 = 0b01;
pub const FLAG_SIGNED: u8 = 0b10;

/// Size of an unsigned label-object packet, the smallest possible packet.
pub const MIN_PACKET_LEN: usize = 4 + 16 * 4 + 8 + 4;
pub const SIGNATURE_LEN: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 2]),
    #[error("unsupported version {0:#04x}")]
    BadVersion(u8),
    #[error("truncated packet: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("reserved flag bits set: {0:#010b}")]
    ReservedFlags(u8),
    #[error("label object with non-empty payload ({0} bytes)")]
    PayloadOnLabelObject(u32),
    #[error("invalid value payload: {0}")]
    InvalidValue(#[from] ValueError),
    #[error("{0} trailing bytes after packet")]
    TrailingBytes(usize),
}

/// 128-bit identity digest of a tuple, excluding its signature.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TupleHash(pub [u8; 16]);

impl std::fmt::Debug for TupleHash {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl std::fmt::Display for TupleHash {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

pub fn encode(t: &Tuple) -> Vec<u8> {
    let mut out = signing_bytes(t);
    if let Some(sig) = t.signature() {
        out.extend_from_slice(sig);
    }
    out
}

/// Every byte of the packet that precedes the signature.
pub fn signing_bytes(t: &Tuple) -> Vec<u8> {
    let payload: &[u8] = t.object().as_value().map_or(&[], Value::payload);
    let mut out = Vec::with_capacity(MIN_PACKET_LEN + 16 + payload.len() + SIGNATURE_LEN);
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    let mut flags = 0;
    if t.object().as_value().is_some() {
        flags |= FLAG_OBJECT_IS_VALUE;
    }
    if t.signer().is_some() {
        flags |= FLAG_SIGNED;
    }
    out.push(flags);
    out.extend_from_slice(t.subject().as_bytes());
    out.extend_from_slice(t.predicate().as_bytes());
    match t.object() {
        NodeRef::Vertex(l) => out.extend_from_slice(l.as_bytes()),
        NodeRef::Value(v) => out.extend_from_slice(v.value_type().label().as_bytes()),
    }
    out.extend_from_slice(t.context().as_bytes());
    out.extend_from_slice(&t.timestamp().to_be_bytes());
    if let Some(s) = t.signer() {
        out.extend_from_slice(s.as_bytes());
    }
    out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    out.extend_from_slice(payload);
    out
}

pub fn canonical_hash(t: &Tuple) -> TupleHash {
    let digest = Sha256::digest(signing_bytes(t));
    TupleHash(digest[..16].try_into().expect("sha256 is 32 bytes"))
}

/// Decode exactly one packet; bytes after it are an error.
pub fn decode(b: &[u8]) -> Result<Tuple, DecodeError> {
    let (t, used) = decode_prefix(b)?;
    if used != b.len() {
        return Err(DecodeError::TrailingBytes(b.len() - used));
    }
    Ok(t)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        let end = self.pos + n;
        if end > self.buf.len() {
            return Err(DecodeError::Truncated { needed: end, available: self.buf.len() });
        }
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn label(&mut self) -> Result<Label, DecodeError> {
        Ok(Label::from_bytes(self.take(16)?.try_into().unwrap()))
    }
}

/// Decode the packet at the start of `b`, returning it with its length.
pub fn decode_prefix(b: &[u8]) -> Result<(Tuple, usize), DecodeError> {
    if b.len() < MIN_PACKET_LEN {
        return Err(DecodeError::Truncated { needed: MIN_PACKET_LEN, available: b.len() });
    }
    let mut c = Cursor { buf: b, pos: 0 };
    let magic: [u8; 2] = c.take(2)?.try_into().unwrap();
    if magic != MAGIC {
        return Err(DecodeError::BadMagic(magic));
    }
    let version = c.take(1)?[0];
    if version != VERSION {
        return Err(DecodeError::BadVersion(version));
    }
    let flags = c.take(1)?[0];
    if flags & !(FLAG_OBJECT_IS_VALUE | FLAG_SIGNED) != 0 {
        return Err(DecodeError::ReservedFlags(flags));
    }
    let subject = c.label()?;
    let predicate = c.label()?;
    let object_slot = c.label()?;
    let context = c.label()?;
    let timestamp = u64::from_be_bytes(c.take(8)?.try_into().unwrap());
    let signer = if flags & FLAG_SIGNED != 0 { Some(c.label()?) } else { None };
    let len = u32::from_be_bytes(c.take(4)?.try_into().unwrap());
    let payload = c.take(len as usize)?;
    let object = if flags & FLAG_OBJECT_IS_VALUE != 0 {
        NodeRef::Value(Value::new(ValueType::from_label(object_slot), payload.to_vec())?)
    } else {
        if len != 0 {
            return Err(DecodeError::PayloadOnLabelObject(len));
        }
        NodeRef::Vertex(object_slot)
    };
    let mut t = Tuple::new(subject, predicate, object, context, timestamp);
    if let Some(signer) = signer {
        let sig: Signature = c.take(SIGNATURE_LEN)?.try_into().unwrap();
        t = t.with_provenance(signer, sig);
    }
    Ok((t, c.pos))
}

/// Iterates over back-to-back packets, as found in `.gsp` files.
pub struct PacketStream<'a> {
    buf: &'a [u8],
    failed: bool,
}

impl<'a> PacketStream<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        PacketStream { buf, failed: false }
    }
}

impl Iterator for PacketStream<'_> {
    type Item = Result<Tuple, DecodeError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.buf.is_empty() {
            return None;
        }
        match decode_prefix(self.buf) {
            Ok((t, used)) => {
                self.buf = &self.buf[used..];
                Some(Ok(t))
            }
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

pub fn encode_stream<'a>(tuples: impl IntoIterator<Item = &'a Tuple>) -> Vec<u8> {
    let mut out = Vec::new();
    for t in tuples {
        out.extend_from_slice(&encode(t));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signing::{sign_tuple, KeyPair};

    fn l(n: u128) -> Label {
        Label::from_u128(n)
    }

    #[test]
    fn unsigned_label_packet_is_80_bytes() {
        let t = Tuple::new(l(1), l(2), l(3), l(4), 1000);
        assert_eq!(encode(&t).len(), 80);
    }

    #[test]
    fn signed_value_packet_is_165_bytes() {
        let kp = KeyPair::from_seed(l(9), [7; 32]);
        let t = sign_tuple(&Tuple::new(l(1), l(2), Value::utf8("hello"), l(4), 1), &kp).unwrap();
        assert_eq!(encode(&t).len(), 165);
    }

    #[test]
    fn zero_tuple_header() {
        let t = Tuple::new(Label::ZERO, Label::ZERO, Label::ZERO, Label::ZERO, 0);
        let b = encode(&t);
        assert_eq!(&b[..4], &[0x47, 0x53, 0x01, 0x00]);
        assert!(b[4..].iter().all(|&x| x == 0));
        assert_eq!(b.len() - 4, 76);
    }

    #[test]
    fn field_offsets() {
        let t = Tuple::new(l(0x11), l(0x22), Value::int64(5), l(0x44), 0x0102030405060708);
        let b = encode(&t);
        assert_eq!(b[3], FLAG_OBJECT_IS_VALUE);
        assert_eq!(b[19], 0x11);
        assert_eq!(b[35], 0x22);
        assert_eq!(&b[36..52], crate::value::registry::INT64.as_bytes());
        assert_eq!(b[67], 0x44);
        assert_eq!(&b[68..76], &[1, 2, 3, 4, 5, 6, 7, 8]);
        assert_eq!(&b[76..80], &[0, 0, 0, 8]);
        assert_eq!(&b[80..88], &5i64.to_be_bytes());
    }

    #[test]
    fn roundtrip_each_kind() {
        let kp = KeyPair::from_seed(l(9), [3; 32]);
        let base = [
            Tuple::new(l(1), l(2), l(3), l(4), 10),
            Tuple::new(l(1), l(2), Value::utf8("Lab A"), l(4), 10),
            Tuple::new(l(1), l(2), Value::bytes(vec![0, 1, 2]), l(4), 10),
            Tuple::new(l(1), l(2), Value::float64(-0.5), l(4), 10),
            Tuple::new(l(1), l(2), Value::new(ValueType::Unknown(l(77)), vec![9]).unwrap(), l(4), 10),
        ];
        for t in base {
            let s = sign_tuple(&t, &kp).unwrap();
            for x in [t, s] {
                let b = encode(&x);
                assert_eq!(decode(&b).unwrap(), x);
            }
        }
    }

    #[test]
    fn malformed_inputs() {
        let good = encode(&Tuple::new(l(1), l(2), l(3), l(4), 1));
        assert!(matches!(decode(&good[..79]), Err(DecodeError::Truncated { .. })));
        let mut b = good.clone();
        b[0] = 0;
        b[1] = 0;
        assert_eq!(decode(&b), Err(DecodeError::BadMagic([0, 0])));
        let mut b = good.clone();
        b[2] = 2;
        assert_eq!(decode(&b), Err(DecodeError::BadVersion(2)));
        let mut b = good.clone();
        b[3] = 0b100;
        assert_eq!(decode(&b), Err(DecodeError::ReservedFlags(0b100)));
        let mut b = good.clone();
        b.push(0);
        assert_eq!(decode(&b), Err(DecodeError::TrailingBytes(1)));
    }

    #[test]
    fn int_flag_without_payload_is_inconsistent() {
        let mut b = encode(&Tuple::new(l(1), l(2), l(3), l(4), 1));
        b[3] = FLAG_OBJECT_IS_VALUE;
        b[36..52].copy_from_slice(crate::value::registry::INT64.as_bytes());
        assert!(matches!(decode(&b), Err(DecodeError::InvalidValue(ValueError::Width { .. }))));
    }

    #[test]
    fn stream_decodes_back_to_back() {
        let ts: Vec<_> = (0..5).map(|i| Tuple::new(l(i), l(2), Value::int64(i as i64), l(4), 1)).collect();
        let bytes = encode_stream(&ts);
        let back: Vec<_> = PacketStream::new(&bytes).collect::<Result<_, _>>().unwrap();
        assert_eq!(back, ts);
        let mut cut = bytes.clone();
        cut.pop();
        let res: Vec<_> = PacketStream::new(&cut).collect();
        assert_eq!(res.len(), 5);
        assert!(res[4].is_err());
    }

    #[test]
    fn canonical_hash_properties() {
        let t = Tuple::new(l(1), l(2), l(3), l(4), 1);
        assert_eq!(canonical_hash(&t), canonical_hash(&t));
        assert_ne!(canonical_hash(&t), canonical_hash(&t.clone().with_timestamp(2)));
        // The signature itself is excluded, the signer field is not.
        let kp = KeyPair::from_seed(l(9), [1; 32]);
        let s = sign_tuple(&t, &kp).unwrap();
        assert_ne!(canonical_hash(&s), canonical_hash(&t));
        let resigned = sign_tuple(&t, &KeyPair::from_seed(l(9), [2; 32])).unwrap();
        assert_ne!(s.signature(), resigned.signature());
        assert_eq!(canonical_hash(&s), canonical_hash(&resigned));
    }
}
