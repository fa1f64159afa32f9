// SPDX-License-Identifier: Apache-2.0

//! A peer's local tuple store: a path-compressed binary trie (crit-bit tree)
//! keyed by interleaved address.
//!
//! Inner nodes only exist where two stored keys first diverge, so memory is
//! proportional to the number of distinct addresses rather than to the
//! 512-bit key width. A wildcard scan follows one child at a 0/1 trit and
//! both at a `*`; bits skipped by path compression are checked at the leaf.

use std::collections::BTreeMap;

use crate::dht::address::{InterleavedAddress, LookupPattern, Trit};
use crate::tuple::Tuple;
use crate::wire;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        key: InterleavedAddress,
        /// Tuples at this address keyed by packet bytes. A label-object
        /// tuple carries no payload: its packet holds the zero-length
        /// "non-value" payload.
        tuples: BTreeMap<Vec<u8>, Tuple>,
    },
    Inner {
        bit: u16,
        children: [usize; 2],
    },
}

#[derive(Debug, Clone, Default)]
pub struct TrieStore {
    nodes: Vec<Node>,
    root: Option<usize>,
    tuples: usize,
}

impl TrieStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of stored tuples.
    pub fn len(&self) -> usize {
        self.tuples
    }

    pub fn is_empty(&self) -> bool {
        self.tuples == 0
    }

    /// Number of distinct addresses.
    pub fn address_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    fn leaf_for(&self, addr: &InterleavedAddress) -> Option<usize> {
        let mut cur = self.root?;
        loop {
            match &self.nodes[cur] {
                Node::Inner { bit, children } => cur = children[addr.bit(*bit as usize) as usize],
                Node::Leaf { .. } => return Some(cur),
            }
        }
    }

    /// Store `t` under `addr`. Returns false if the identical tuple was
    /// already present.
    pub fn insert(&mut self, addr: InterleavedAddress, t: Tuple) -> bool {
        let packet = wire::encode(&t);
        let Some(near) = self.leaf_for(&addr) else {
            self.nodes.push(Node::Leaf { key: addr, tuples: BTreeMap::from([(packet, t)]) });
            self.root = Some(self.nodes.len() - 1);
            self.tuples += 1;
            return true;
        };
        let Node::Leaf { key, .. } = &self.nodes[near] else { unreachable!() };
        let Some(crit) = key.first_difference(&addr) else {
            let Node::Leaf { tuples, .. } = &mut self.nodes[near] else { unreachable!() };
            let fresh = tuples.insert(packet, t).is_none();
            self.tuples += fresh as usize;
            return fresh;
        };

        let leaf = self.nodes.len();
        self.nodes.push(Node::Leaf { key: addr, tuples: BTreeMap::from([(packet, t)]) });
        self.tuples += 1;

        // Find the edge where the new inner node belongs: the first node
        // whose branch bit is past `crit`.
        let mut parent: Option<(usize, usize)> = None;
        let mut cur = self.root.expect("non-empty");
        while let Node::Inner { bit, children } = &self.nodes[cur] {
            if *bit as usize > crit {
                break;
            }
            let dir = addr.bit(*bit as usize) as usize;
            parent = Some((cur, dir));
            cur = children[dir];
        }
        let dir = addr.bit(crit) as usize;
        let mut children = [cur, cur];
        children[dir] = leaf;
        let inner = self.nodes.len();
        self.nodes.push(Node::Inner { bit: crit as u16, children });
        match parent {
            None => self.root = Some(inner),
            Some((p, d)) => {
                let Node::Inner { children, .. } = &mut self.nodes[p] else { unreachable!() };
                children[d] = inner;
            }
        }
        true
    }

    /// Tuples stored exactly at `addr`.
    pub fn get(&self, addr: &InterleavedAddress) -> Vec<&Tuple> {
        match self.leaf_for(addr).map(|i| &self.nodes[i]) {
            Some(Node::Leaf { key, tuples }) if key == addr => tuples.values().collect(),
            _ => Vec::new(),
        }
    }

    /// All tuples whose address matches `p`, by depth-first descent.
    pub fn scan(&self, p: &LookupPattern) -> Vec<&Tuple> {
        let mut out = Vec::new();
        let Some(root) = self.root else { return out };
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            match &self.nodes[i] {
                Node::Inner { bit, children } => match p.trit(*bit as usize) {
                    Trit::Zero => stack.push(children[0]),
                    Trit::One => stack.push(children[1]),
                    Trit::Any => {
                        stack.push(children[1]);
                        stack.push(children[0]);
                    }
                },
                Node::Leaf { key, tuples } => {
                    if p.matches(key) {
                        out.extend(tuples.values());
                    }
                }
            }
        }
        out
    }

    /// Every stored tuple, in address order.
    pub fn iter(&self) -> impl Iterator<Item = &Tuple> {
        self.scan_all().into_iter()
    }

    fn scan_all(&self) -> Vec<&Tuple> {
        self.scan(&LookupPattern::any())
    }
}

/// Convenience: the trie scan as a free function over a store.
pub fn trie_scan<'a>(store: &'a TrieStore, p: &LookupPattern) -> Vec<&'a Tuple> {
    store.scan(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dht::address::{pattern_address, tuple_address};
    use crate::filter::{matches, FilterTemplate, Slot};
    use crate::label::Label;

    fn l(n: u128) -> Label {
        Label::from_u128(n)
    }

    fn put(store: &mut TrieStore, t: Tuple) -> bool {
        store.insert(tuple_address(&t), t)
    }

    #[test]
    fn empty_store() {
        let s = TrieStore::new();
        assert!(s.scan(&LookupPattern::any()).is_empty());
        assert!(s.get(&InterleavedAddress::ZERO).is_empty());
    }

    #[test]
    fn insert_get_and_idempotence() {
        let mut s = TrieStore::new();
        let t = Tuple::new(l(1), l(2), l(3), l(4), 5);
        assert!(put(&mut s, t.clone()));
        assert!(!put(&mut s, t.clone()));
        assert_eq!(s.len(), 1);
        // Same address, different timestamp: a distinct tuple at one leaf.
        assert!(put(&mut s, t.clone().with_timestamp(6)));
        assert_eq!(s.len(), 2);
        assert_eq!(s.address_count(), 1);
        assert_eq!(s.get(&tuple_address(&t)).len(), 2);
    }

    #[test]
    fn all_star_scan_returns_everything() {
        let mut s = TrieStore::new();
        for i in 0..50u128 {
            put(&mut s, Tuple::new(l(i * 7919), l(i % 3), l(i), l(0), 0));
        }
        assert_eq!(s.scan(&LookupPattern::any()).len(), 50);
        assert_eq!(s.iter().count(), 50);
    }

    #[test]
    fn predicate_scan_matches_linear_filter() {
        let mut s = TrieStore::new();
        let mut all = Vec::new();
        for i in 0..200u128 {
            let t = Tuple::new(l(i.wrapping_mul(0x9e37_79b9_7f4a_7c15)), l(i % 5), l(i ^ 0xff), l(i % 2), 0);
            put(&mut s, t.clone());
            all.push(t);
        }
        let f = FilterTemplate::new(Slot::Wildcard, l(3), Slot::Wildcard, l(1)).unwrap();
        let mut got: Vec<_> = s.scan(&pattern_address(&f)).into_iter().cloned().collect();
        let mut want: Vec<_> = all.into_iter().filter(|t| matches(&f, t)).collect();
        got.sort();
        want.sort();
        assert!(!want.is_empty());
        assert_eq!(got, want);
    }
}
