// SPDX-License-Identifier: Apache-2.0

//! 128-bit labels naming vertices, edge types and contexts.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;

/// An opaque 128-bit identifier laid out as an RFC 4122 UUID.
///
/// Labels carry no semantics of their own: two labels are the same label iff
/// their bits are equal.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Label([u8; 16]);

impl Label {
    pub const ZERO: Label = Label([0; 16]);

    pub const fn from_bytes(bytes: [u8; 16]) -> Self {
        Label(bytes)
    }

    pub const fn from_u128(v: u128) -> Self {
        Label(v.to_be_bytes())
    }

    pub const fn as_bytes(&self) -> &[u8; 16] {
        &self.0
    }

    pub const fn to_u128(self) -> u128 {
        u128::from_be_bytes(self.0)
    }

    /// Bit `i` counted from the most significant bit (bit 127 is the MSB).
    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < 128);
        (self.to_u128() >> i) & 1 == 1
    }
}

/// Draw a random-variant (version 4) label from `rng`.
///
/// Deterministic for a seeded source: the same seed yields the same sequence.
pub fn new_label<R: RngCore + ?Sized>(rng: &mut R) -> Label {
    let mut bytes = [0u8; 16];
    rng.fill_bytes(&mut bytes);
    Label(*uuid::Builder::from_random_bytes(bytes).as_uuid().as_bytes())
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&uuid::Uuid::from_bytes(self.0).hyphenated(), f)
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Label({self})")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid label {0:?}: expected a hyphenated UUID")]
pub struct ParseLabelError(pub String);

impl FromStr for Label {
    type Err = ParseLabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        // Only the canonical 36-character hyphenated form is accepted.
        if s.len() != 36 {
            return Err(ParseLabelError(s.to_owned()));
        }
        uuid::Uuid::parse_str(s)
            .map(|u| Label(*u.as_bytes()))
            .map_err(|_| ParseLabelError(s.to_owned()))
    }
}

impl From<uuid::Uuid> for Label {
    fn from(u: uuid::Uuid) -> Self {
        Label(*u.as_bytes())
    }
}

impl serde::Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = <std::borrow::Cow<'de, str>>::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    #[test]
    fn successive_draws_differ() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let a = new_label(&mut rng);
        let b = new_label(&mut rng);
        assert_ne!(a, b);
    }

    #[test]
    fn seeded_sequence_is_reproducible() {
        let mut r1 = ChaCha8Rng::seed_from_u64(42);
        let mut r2 = ChaCha8Rng::seed_from_u64(42);
        let xs: Vec<_> = (0..16).map(|_| new_label(&mut r1)).collect();
        let ys: Vec<_> = (0..16).map(|_| new_label(&mut r2)).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn hundred_thousand_draws_are_distinct() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut seen = HashSet::with_capacity(100_000);
        for _ in 0..100_000 {
            assert!(seen.insert(new_label(&mut rng)));
        }
        assert_eq!(seen.len(), 100_000);
    }

    #[test]
    fn random_variant_layout() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let l = new_label(&mut rng);
        let u = uuid::Uuid::from_bytes(*l.as_bytes());
        assert_eq!(u.get_version_num(), 4);
        assert_eq!(u.get_variant(), uuid::Variant::RFC4122);
    }

    #[test]
    fn text_roundtrip() {
        let l = Label::from_u128(0x0123_4567_89ab_cdef_0011_2233_4455_6677);
        let s = l.to_string();
        assert_eq!(s, "01234567-89ab-cdef-0011-223344556677");
        assert_eq!(s.parse::<Label>().unwrap(), l);
        assert!("0123456789abcdef0011223344556677".parse::<Label>().is_err());
        assert!("nope".parse::<Label>().is_err());
    }

    #[test]
    fn bit_indexing_is_msb_127() {
        let l = Label::from_u128(1u128 << 127 | 1);
        assert!(l.bit(127));
        assert!(l.bit(0));
        assert!(!l.bit(64));
    }
}
