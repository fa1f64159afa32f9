// SPDX-License-Identifier: Apache-2.0

//! 512-bit tuple addresses built by bit interleaving.
//!
//! The four 128-bit components (subject, predicate, object, context) are
//! merged round-robin from the most significant bit down, so address bit
//! `4j + m` (counting from the MSB) is bit `127 - j` of component `m`. Every
//! component therefore contributes to every prefix of the address, which
//! spreads tuples over the key space even when one component (typically the
//! predicate) takes only a handful of distinct values.

use std::fmt;

use sha2::{Digest, Sha256};

use crate::filter::{FilterTemplate, Slot};
use crate::label::Label;
use crate::tuple::{NodeRef, Tuple};
use crate::value::Value;

pub const ADDRESS_BITS: usize = 512;
pub const ADDRESS_BYTES: usize = ADDRESS_BITS / 8;
pub const COMPONENTS: usize = 4;

#[inline]
fn get_bit(bytes: &[u8], i: usize) -> bool {
    bytes[i / 8] >> (7 - i % 8) & 1 == 1
}

#[inline]
fn set_bit(bytes: &mut [u8], i: usize, v: bool) {
    let mask = 1u8 << (7 - i % 8);
    if v {
        bytes[i / 8] |= mask;
    } else {
        bytes[i / 8] &= !mask;
    }
}

/// A 512-bit tuple key. Bit 0 is the most significant bit.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InterleavedAddress(pub(crate) [u8; ADDRESS_BYTES]);

impl InterleavedAddress {
    pub const ZERO: InterleavedAddress = InterleavedAddress([0; ADDRESS_BYTES]);

    pub fn as_bytes(&self) -> &[u8; ADDRESS_BYTES] {
        &self.0
    }

    pub fn from_bytes(bytes: [u8; ADDRESS_BYTES]) -> Self {
        InterleavedAddress(bytes)
    }

    pub fn bit(&self, i: usize) -> bool {
        get_bit(&self.0, i)
    }

    /// Index of the first bit where `self` and `other` differ.
    pub fn first_difference(&self, other: &Self) -> Option<usize> {
        self.0.iter().zip(other.0.iter()).enumerate().find_map(|(i, (a, b))| {
            let x = a ^ b;
            (x != 0).then(|| i * 8 + x.leading_zeros() as usize)
        })
    }
}

impl fmt::Debug for InterleavedAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("addr:")?;
        for b in &self.0[..8] {
            write!(f, "{b:02x}")?;
        }
        f.write_str("…")
    }
}

/// Merge four components into one address.
pub fn interleave(components: [Label; COMPONENTS]) -> InterleavedAddress {
    let words = components.map(Label::to_u128);
    let mut out = [0u8; ADDRESS_BYTES];
    for j in 0..128 {
        for (m, w) in words.iter().enumerate() {
            set_bit(&mut out, 4 * j + m, (w >> (127 - j)) & 1 == 1);
        }
    }
    InterleavedAddress(out)
}

/// Split an address back into its four components.
pub fn deinterleave(addr: &InterleavedAddress) -> [Label; COMPONENTS] {
    let mut words = [0u128; COMPONENTS];
    for j in 0..128 {
        for (m, w) in words.iter_mut().enumerate() {
            if addr.bit(4 * j + m) {
                *w |= 1 << (127 - j);
            }
        }
    }
    words.map(Label::from_u128)
}

/// 128-bit digest standing in for a value object in the address.
pub fn value_digest(v: &Value) -> Label {
    let mut h = Sha256::new();
    h.update(v.value_type().label().as_bytes());
    h.update(v.payload());
    Label::from_bytes(h.finalize()[..16].try_into().expect("sha256 is 32 bytes"))
}

pub fn object_component(o: &NodeRef) -> Label {
    match o {
        NodeRef::Vertex(l) => *l,
        NodeRef::Value(v) => value_digest(v),
    }
}

/// Address of a tuple. Timestamp, signer and signature do not contribute.
pub fn tuple_address(t: &Tuple) -> InterleavedAddress {
    interleave([t.subject(), t.predicate(), object_component(t.object()), t.context()])
}

/// One symbol of a lookup pattern.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Trit {
    Zero,
    One,
    Any,
}

impl Trit {
    pub fn accepts(self, bit: bool) -> bool {
        match self {
            Trit::Zero => !bit,
            Trit::One => bit,
            Trit::Any => true,
        }
    }
}

/// A 512-trit lookup vector over {0, 1, *}.
///
/// Stored as a value mask and a care mask; positions where the care bit is
/// clear are `*` and carry a zero value bit.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct LookupPattern {
    value: [u8; ADDRESS_BYTES],
    care: [u8; ADDRESS_BYTES],
}

impl LookupPattern {
    /// Build from per-component optional labels; `None` is a wildcard
    /// component.
    pub fn from_components(components: [Option<Label>; COMPONENTS]) -> Self {
        let value = interleave(components.map(|c| c.unwrap_or(Label::ZERO))).0;
        let care = interleave(components.map(|c| match c {
            Some(_) => Label::from_u128(u128::MAX),
            None => Label::ZERO,
        }))
        .0;
        LookupPattern { value, care }
    }

    pub fn exact(addr: &InterleavedAddress) -> Self {
        LookupPattern { value: addr.0, care: [0xff; ADDRESS_BYTES] }
    }

    pub fn any() -> Self {
        LookupPattern { value: [0; ADDRESS_BYTES], care: [0; ADDRESS_BYTES] }
    }

    pub fn trit(&self, i: usize) -> Trit {
        match (get_bit(&self.care, i), get_bit(&self.value, i)) {
            (false, _) => Trit::Any,
            (true, false) => Trit::Zero,
            (true, true) => Trit::One,
        }
    }

    pub fn trits(&self) -> impl Iterator<Item = Trit> + '_ {
        (0..ADDRESS_BITS).map(|i| self.trit(i))
    }

    pub fn wildcard_count(&self) -> usize {
        self.wildcards_in_prefix(ADDRESS_BITS)
    }

    /// Number of `*` among the first `bits` positions.
    pub fn wildcards_in_prefix(&self, bits: usize) -> usize {
        (0..bits.min(ADDRESS_BITS)).filter(|&i| !get_bit(&self.care, i)).count()
    }

    pub fn matches(&self, addr: &InterleavedAddress) -> bool {
        self.care.iter().zip(self.value.iter()).zip(addr.0.iter()).all(|((c, v), a)| (a ^ v) & c == 0)
    }

    /// The address obtained by setting every `*` to 0.
    pub fn zero_filled(&self) -> InterleavedAddress {
        InterleavedAddress(self.value)
    }

    /// Enumerate every concretization of the `*` positions among the first
    /// `bits` positions, with all later `*` set to 0.
    pub fn concretize_prefix(&self, bits: usize) -> Vec<InterleavedAddress> {
        let free: Vec<usize> = (0..bits.min(ADDRESS_BITS)).filter(|&i| !get_bit(&self.care, i)).collect();
        let mut out = Vec::with_capacity(1 << free.len());
        for combo in 0u64..(1u64 << free.len()) {
            let mut a = self.value;
            for (k, &pos) in free.iter().enumerate() {
                set_bit(&mut a, pos, (combo >> (free.len() - 1 - k)) & 1 == 1);
            }
            out.push(InterleavedAddress(a));
        }
        out
    }

    /// Wire form: 2 bits per trit, MSB first; 00 = 0, 01 = 1, 10 = *.
    pub fn to_wire(&self) -> [u8; 128] {
        let mut out = [0u8; 128];
        for i in 0..ADDRESS_BITS {
            let code: u8 = match self.trit(i) {
                Trit::Zero => 0b00,
                Trit::One => 0b01,
                Trit::Any => 0b10,
            };
            out[i / 4] |= code << (6 - 2 * (i % 4));
        }
        out
    }

    pub fn from_wire(bytes: &[u8; 128]) -> Option<Self> {
        let mut p = LookupPattern::any();
        for i in 0..ADDRESS_BITS {
            match (bytes[i / 4] >> (6 - 2 * (i % 4))) & 0b11 {
                0b00 => set_bit(&mut p.care, i, true),
                0b01 => {
                    set_bit(&mut p.care, i, true);
                    set_bit(&mut p.value, i, true);
                }
                0b10 => {}
                _ => return None,
            }
        }
        Some(p)
    }
}

impl fmt::Debug for LookupPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("pattern:")?;
        for t in self.trits().take(32) {
            f.write_str(match t {
                Trit::Zero => "0",
                Trit::One => "1",
                Trit::Any => "*",
            })?;
        }
        write!(f, "… ({} *)", self.wildcard_count())
    }
}

fn slot_component(s: &Slot) -> Option<Label> {
    match s {
        Slot::Wildcard => None,
        Slot::Label(l) => Some(*l),
        Slot::Value(v) => Some(value_digest(v)),
    }
}

/// Lookup vector for a filter template, shuffled the same way as
/// [`tuple_address`].
pub fn pattern_address(f: &FilterTemplate) -> LookupPattern {
    let [s, p, o, c] = f.slots();
    LookupPattern::from_components([slot_component(s), slot_component(p), slot_component(o), slot_component(c)])
}

/// Routing prefix width `ceil(log2 N) + k_slack`, capped at 512.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EffectiveWidthParams {
    pub estimated_peers: usize,
    pub k_slack: usize,
}

impl EffectiveWidthParams {
    pub const DEFAULT_K_SLACK: usize = 3;

    pub fn new(estimated_peers: usize) -> Self {
        EffectiveWidthParams { estimated_peers, k_slack: Self::DEFAULT_K_SLACK }
    }

    pub fn width(&self) -> usize {
        let n = self.estimated_peers.max(1);
        let log = if n <= 1 { 0 } else { (usize::BITS - (n - 1).leading_zeros()) as usize };
        (log + self.k_slack).min(ADDRESS_BITS)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::Value;

    fn l(n: u128) -> Label {
        Label::from_u128(n)
    }

    #[test]
    fn zero_components_zero_address() {
        assert_eq!(interleave([Label::ZERO; 4]), InterleavedAddress::ZERO);
    }

    #[test]
    fn top_bits_round_robin() {
        // MSB of each component lands in address bits 0..4 in component order.
        let a = interleave([l(1 << 127), l(0), l(1 << 127), l(1 << 127)]);
        assert_eq!(a.as_bytes()[0] >> 4, 0b1011);
        // LSBs land in the last four bits.
        let b = interleave([l(0), l(1), l(0), l(0)]);
        assert_eq!(b.as_bytes()[63], 0b0100);
    }

    #[test]
    fn roundtrip_simple() {
        let c = [l(0xdead), l(u128::MAX), l(0), l(1 << 100 | 7)];
        assert_eq!(deinterleave(&interleave(c)), c);
    }

    #[test]
    fn timestamp_does_not_move_address() {
        let t = Tuple::new(l(1), l(2), Value::utf8("x"), l(4), 10);
        assert_eq!(tuple_address(&t), tuple_address(&t.clone().with_timestamp(99)));
    }

    #[test]
    fn effective_width() {
        assert_eq!(EffectiveWidthParams::new(64).width(), 9);
        assert_eq!(EffectiveWidthParams::new(65).width(), 10);
        assert_eq!(EffectiveWidthParams::new(1).width(), 3);
        assert_eq!(EffectiveWidthParams { estimated_peers: 8, k_slack: 600 }.width(), 512);
    }

    #[test]
    fn subject_wildcard_positions() {
        let p = LookupPattern::from_components([None, Some(l(2)), Some(l(3)), Some(l(4))]);
        for i in 0..ADDRESS_BITS {
            assert_eq!(p.trit(i) == Trit::Any, i % 4 == 0, "position {i}");
        }
        assert_eq!(p.wildcard_count(), 128);
        assert_eq!(p.wildcards_in_prefix(9), 3);
    }

    #[test]
    fn concretize_prefix_enumerates_branches() {
        let p = LookupPattern::from_components([None, Some(l(2)), Some(l(3)), Some(l(4))]);
        let branches = p.concretize_prefix(9);
        assert_eq!(branches.len(), 8);
        let mut prefixes: Vec<_> = branches.iter().map(|a| (a.bit(0), a.bit(4), a.bit(8))).collect();
        prefixes.sort();
        prefixes.dedup();
        assert_eq!(prefixes.len(), 8);
        // Stars beyond the prefix are routed as zero.
        assert!(branches.iter().all(|a| !a.bit(12)));
    }

    #[test]
    fn wire_roundtrip_and_invalid_code() {
        let p = LookupPattern::from_components([None, Some(l(0xabc)), None, Some(l(4))]);
        assert_eq!(LookupPattern::from_wire(&p.to_wire()), Some(p));
        let mut w = p.to_wire();
        w[0] |= 0b1100_0000;
        assert_eq!(LookupPattern::from_wire(&w), None);
    }

    #[test]
    fn first_difference() {
        let a = InterleavedAddress::ZERO;
        let mut b = a;
        b.0[2] = 0b0001_0000;
        assert_eq!(a.first_difference(&b), Some(19));
        assert_eq!(a.first_difference(&a), None);
    }
}
