// SPDX-License-Identifier: Apache-2.0

//! Node ids, the XOR metric and k-bucket routing tables over 512-bit ids.

use std::collections::VecDeque;
use std::fmt;

use rand::RngCore;

use crate::dht::address::{InterleavedAddress, ADDRESS_BITS, ADDRESS_BYTES};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub [u8; ADDRESS_BYTES]);

impl NodeId {
    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut b = [0u8; ADDRESS_BYTES];
        rng.fill_bytes(&mut b);
        NodeId(b)
    }

    pub fn distance(&self, other: &NodeId) -> Distance {
        let mut d = [0u8; ADDRESS_BYTES];
        for (i, x) in d.iter_mut().enumerate() {
            *x = self.0[i] ^ other.0[i];
        }
        Distance(d)
    }

    /// Id `i` of `n` evenly spaced over the id space: `floor(i * 2^512 / n)`.
    pub fn evenly_spaced(i: usize, n: usize) -> Self {
        assert!(n > 0 && i < n);
        // Long division of the 513-bit numerator i * 2^512 by n, byte by byte.
        let mut out = [0u8; ADDRESS_BYTES];
        let mut rem = i as u128;
        for b in out.iter_mut() {
            let cur = rem << 8;
            *b = (cur / n as u128) as u8;
            rem = cur % n as u128;
        }
        NodeId(out)
    }
}

impl From<InterleavedAddress> for NodeId {
    fn from(a: InterleavedAddress) -> Self {
        NodeId(*a.as_bytes())
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("node:")?;
        for b in &self.0[..6] {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

/// XOR distance, ordered as a big-endian integer.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Distance(pub [u8; ADDRESS_BYTES]);

impl Distance {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }

    /// `i` such that the distance lies in `[2^i, 2^(i+1))`; `None` for zero.
    pub fn bucket_index(&self) -> Option<usize> {
        let lz = self.0.iter().position(|&b| b != 0)?;
        Some(ADDRESS_BITS - 1 - (lz * 8 + self.0[lz].leading_zeros() as usize))
    }
}

/// Simulator-level transport address of a peer.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PeerAddr(pub u32);

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Contact {
    pub id: NodeId,
    pub addr: PeerAddr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observed {
    Inserted,
    Refreshed,
    SelfContact,
    /// Bucket full. The least-recently-seen entry should be pinged; if it
    /// fails to answer, replace it with the newcomer.
    BucketFull { least_recent: Contact },
}

#[derive(Debug, Clone)]
pub struct RoutingTable {
    own: NodeId,
    k: usize,
    /// Bucket `i` holds contacts at distance `[2^i, 2^(i+1))`, least
    /// recently seen at the front.
    buckets: Vec<VecDeque<Contact>>,
}

impl RoutingTable {
    pub fn new(own: NodeId, k: usize) -> Self {
        RoutingTable { own, k, buckets: vec![VecDeque::new(); ADDRESS_BITS] }
    }

    pub fn own_id(&self) -> NodeId {
        self.own
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.buckets.iter().map(VecDeque::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bucket(&self, i: usize) -> &VecDeque<Contact> {
        &self.buckets[i]
    }

    /// Record that `c` was just heard from.
    pub fn observe(&mut self, c: Contact) -> Observed {
        let Some(i) = self.own.distance(&c.id).bucket_index() else {
            return Observed::SelfContact;
        };
        let bucket = &mut self.buckets[i];
        if let Some(pos) = bucket.iter().position(|x| x.id == c.id) {
            let mut existing = bucket.remove(pos).expect("position is valid");
            existing.addr = c.addr;
            bucket.push_back(existing);
            return Observed::Refreshed;
        }
        if bucket.len() < self.k {
            bucket.push_back(c);
            return Observed::Inserted;
        }
        Observed::BucketFull { least_recent: *bucket.front().expect("full bucket") }
    }

    /// Drop `stale` (which failed to answer a ping) and insert `newcomer`.
    pub fn replace(&mut self, stale: &NodeId, newcomer: Contact) {
        if let Some(i) = self.own.distance(stale).bucket_index() {
            self.buckets[i].retain(|c| c.id != *stale);
        }
        // If the bucket refilled in the meantime the newcomer is dropped.
        let _ = self.observe(newcomer);
    }

    pub fn remove(&mut self, id: &NodeId) {
        if let Some(i) = self.own.distance(id).bucket_index() {
            self.buckets[i].retain(|c| c.id != *id);
        }
    }

    pub fn contains(&self, id: &NodeId) -> bool {
        self.own
            .distance(id)
            .bucket_index()
            .is_some_and(|i| self.buckets[i].iter().any(|c| c.id == *id))
    }

    /// Up to `n` known contacts closest to `target`, nearest first.
    pub fn closest(&self, target: &NodeId, n: usize) -> Vec<Contact> {
        let mut all: Vec<Contact> = self.buckets.iter().flatten().copied().collect();
        all.sort_by_key(|c| c.id.distance(target));
        all.truncate(n);
        all
    }

    pub fn contacts(&self) -> impl Iterator<Item = &Contact> {
        self.buckets.iter().flatten()
    }

    /// Check the bucket invariants; returns a description of the first
    /// violation.
    pub fn audit(&self) -> Result<(), String> {
        for (i, b) in self.buckets.iter().enumerate() {
            if b.len() > self.k {
                return Err(format!("bucket {i} holds {} > k={} contacts", b.len(), self.k));
            }
            for c in b {
                if self.own.distance(&c.id).bucket_index() != Some(i) {
                    return Err(format!("contact {:?} is in bucket {i} but belongs elsewhere", c.id));
                }
                if b.iter().filter(|x| x.id == c.id).count() != 1 {
                    return Err(format!("contact {:?} duplicated in bucket {i}", c.id));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id_with_first_byte(b: u8, last: u8) -> NodeId {
        let mut x = [0u8; ADDRESS_BYTES];
        x[0] = b;
        x[63] = last;
        NodeId(x)
    }

    fn contact(id: NodeId, a: u32) -> Contact {
        Contact { id, addr: PeerAddr(a) }
    }

    #[test]
    fn bucket_index_ranges() {
        let zero = NodeId([0; ADDRESS_BYTES]);
        assert_eq!(zero.distance(&zero).bucket_index(), None);
        assert_eq!(zero.distance(&id_with_first_byte(0, 1)).bucket_index(), Some(0));
        assert_eq!(zero.distance(&id_with_first_byte(0x80, 0)).bucket_index(), Some(511));
        assert_eq!(zero.distance(&id_with_first_byte(0x01, 0)).bucket_index(), Some(504));
    }

    #[test]
    fn full_bucket_reports_least_recent() {
        let own = NodeId([0; ADDRESS_BYTES]);
        let mut rt = RoutingTable::new(own, 2);
        let a = contact(id_with_first_byte(0x80, 1), 1);
        let b = contact(id_with_first_byte(0x80, 2), 2);
        let c = contact(id_with_first_byte(0x80, 3), 3);
        assert_eq!(rt.observe(a), Observed::Inserted);
        assert_eq!(rt.observe(b), Observed::Inserted);
        assert_eq!(rt.observe(c), Observed::BucketFull { least_recent: a });
        // Hearing from a moves it to the back.
        assert_eq!(rt.observe(a), Observed::Refreshed);
        assert_eq!(rt.observe(c), Observed::BucketFull { least_recent: b });
        rt.replace(&b.id, c);
        assert!(rt.contains(&c.id) && !rt.contains(&b.id));
        assert_eq!(rt.observe(contact(own, 9)), Observed::SelfContact);
        rt.audit().unwrap();
    }

    #[test]
    fn closest_sorted_by_xor() {
        let own = NodeId([0; ADDRESS_BYTES]);
        let mut rt = RoutingTable::new(own, 20);
        for (i, b) in [0x10u8, 0x80, 0x11, 0x40].into_iter().enumerate() {
            rt.observe(contact(id_with_first_byte(b, 0), i as u32));
        }
        let target = id_with_first_byte(0x11, 0);
        let got: Vec<u8> = rt.closest(&target, 3).iter().map(|c| c.id.0[0]).collect();
        assert_eq!(got, vec![0x11, 0x10, 0x40]);
    }

    #[test]
    fn evenly_spaced_ids() {
        assert_eq!(NodeId::evenly_spaced(0, 64).0, [0; 64]);
        assert_eq!(NodeId::evenly_spaced(1, 64).0[0], 0b0000_0100);
        assert_eq!(NodeId::evenly_spaced(63, 64).0[0], 0b1111_1100);
        // 1/3 of the space is 0x5555…
        assert!(NodeId::evenly_spaced(1, 3).0.iter().all(|&b| b == 0x55));
    }
}
