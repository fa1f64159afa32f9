// SPDX-License-Identifier: Apache-2.0

mod support;

use std::collections::BTreeSet;

use infonet::dht::{
    deinterleave, interleave, pattern_address, trie_scan, tuple_address, LookupPattern, NodeId, PeerAddr,
    RoutingTable, TrieStore,
};
use infonet::dht::routing::Contact;
use infonet::filter::{matches, FilterTemplate};
use infonet::rete::{compile, reorder_patterns};
use infonet::wire;
use infonet::{Label, Tuple};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{interleave_oracle, keys, nested_loop_join, random_tuple, Vocab};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn label() -> impl Strategy<Value = Label> {
    any::<u128>().prop_map(Label::from_u128)
}

proptest! {
    #[test]
    fn wire_roundtrip_is_identity(seed in any::<u64>()) {
        let keys = keys(2);
        let t = random_tuple(&mut rng(seed), &keys);
        let b = wire::encode(&t);
        let back = wire::decode(&b).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(wire::encode(&back), b);
    }

    #[test]
    fn decode_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        let _ = wire::decode(&bytes);
    }

    #[test]
    fn interleave_roundtrip(c in proptest::array::uniform4(any::<u128>())) {
        let labels = c.map(Label::from_u128);
        let a = interleave(labels);
        prop_assert_eq!(deinterleave(&a), labels);
        let oracle = interleave_oracle(c);
        prop_assert!((0..512).all(|i| a.bit(i) == oracle[i]));
    }

    #[test]
    fn address_ignores_time_and_signature(seed in any::<u64>(), ts in any::<u64>()) {
        let keys = keys(1);
        let t = random_tuple(&mut rng(seed), &keys);
        prop_assert_eq!(tuple_address(&t), tuple_address(&t.unsigned().with_timestamp(ts)));
    }

    #[test]
    fn lookup_pattern_wire_roundtrip(parts in proptest::array::uniform4(proptest::option::of(label()))) {
        let p = LookupPattern::from_components(parts);
        prop_assert_eq!(LookupPattern::from_wire(&p.to_wire()), Some(p));
    }

    #[test]
    fn pattern_matches_exactly_the_template(seed in any::<u64>(), mask in 0u8..16) {
        let mut r = rng(seed);
        let v = Vocab::new(&mut r);
        let tuples = v.tuples(&mut r, 40);
        let mut f = FilterTemplate::ground(tuples.choose(&mut r).unwrap());
        for i in 0..4 {
            if mask & (1 << i) != 0 {
                f = f.relax(i);
            }
        }
        let p = pattern_address(&f);
        for t in &tuples {
            prop_assert_eq!(p.matches(&tuple_address(t)), matches(&f, t));
        }
    }

    #[test]
    fn relaxing_a_slot_never_loses_matches(seed in any::<u64>(), slot in 0usize..4) {
        let mut r = rng(seed);
        let v = Vocab::new(&mut r);
        let tuples = v.tuples(&mut r, 60);
        let f = FilterTemplate::ground(tuples.choose(&mut r).unwrap());
        let g = f.relax(slot);
        for t in &tuples {
            prop_assert!(!matches(&f, t) || matches(&g, t));
        }
        prop_assert!(tuples.iter().all(|t| matches(&FilterTemplate::any(), t)));
    }

    #[test]
    fn trie_scan_equals_linear_scan(seed in any::<u64>(), mask in 0u8..16, n in 0usize..300) {
        let mut r = rng(seed);
        let v = Vocab::new(&mut r);
        let tuples = v.tuples(&mut r, n);
        let mut store = TrieStore::new();
        for t in &tuples {
            store.insert(tuple_address(t), t.clone());
        }
        prop_assert_eq!(store.len(), tuples.len());
        let base = tuples.first().cloned().unwrap_or_else(|| Tuple::new(Label::ZERO, Label::ZERO, Label::ZERO, Label::ZERO, 0));
        let mut f = FilterTemplate::ground(&base);
        for i in 0..4 {
            if mask & (1 << i) != 0 {
                f = f.relax(i);
            }
        }
        let got: BTreeSet<&Tuple> = trie_scan(&store, &pattern_address(&f)).into_iter().collect();
        let want: BTreeSet<&Tuple> = tuples.iter().filter(|t| matches(&f, t)).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn rete_matches_nested_loop_in_any_order(seed in any::<u64>(), n in 0usize..120) {
        let mut r = rng(seed);
        let v = Vocab::new(&mut r);
        let q = v.query(&mut r, 4);
        let mut tuples = v.tuples(&mut r, n);
        let oracle = nested_loop_join(&q, &tuples);
        for query in [q.clone(), reorder_patterns(&q)] {
            tuples.shuffle(&mut r);
            let mut net = compile(&query);
            let mut emitted = Vec::new();
            for t in &tuples {
                emitted.extend(net.feed(t));
            }
            let set: BTreeSet<_> = emitted.iter().cloned().collect();
            prop_assert_eq!(set.len(), emitted.len(), "a binding was emitted twice");
            prop_assert_eq!(&set, &oracle);
        }
    }

    #[test]
    fn routing_table_invariants_hold(seed in any::<u64>(), n in 0usize..300, k in 1usize..8) {
        let mut r = rng(seed);
        let own = NodeId::random(&mut r);
        let mut table = RoutingTable::new(own, k);
        let mut seen = Vec::new();
        for i in 0..n {
            let c = Contact { id: NodeId::random(&mut r), addr: PeerAddr(i as u32) };
            seen.push(c);
            let _ = table.observe(c);
            // re-observe something old now and then
            if i % 7 == 3 {
                let _ = table.observe(seen[i / 2]);
            }
        }
        prop_assert!(table.audit().is_ok(), "{:?}", table.audit());
        let target = NodeId::random(&mut r);
        let closest = table.closest(&target, k);
        let mut all: Vec<Contact> = table.contacts().copied().collect();
        all.sort_by_key(|c| c.id.distance(&target));
        all.truncate(k);
        prop_assert_eq!(closest, all);
    }
}
