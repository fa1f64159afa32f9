// SPDX-License-Identifier: Apache-2.0

mod support;

use std::collections::BTreeSet;

use infonet::dht::{pattern_address, tuple_address, DhtError};
use infonet::filter::FilterTemplate;
use infonet::names::NameDirectory;
use infonet::node::Delivery;
use infonet::rete::{parse_query, Binding};
use infonet::sim::workload::{random_template, random_tuples, WorkloadSpec};
use infonet::sim::{spawn_network, Latency, SimConfig, SimError};
use infonet::{Label, NodeRef, Tuple, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn empty_network_oracle_is_empty() {
    let sim = spawn_network(SimConfig::with_peers(8, 1));
    assert!(sim.global_oracle_scan(&FilterTemplate::any()).is_empty());
}

#[test]
fn stored_tuple_is_found_by_its_ground_template() {
    let mut sim = spawn_network(SimConfig::with_peers(8, 1));
    let t = Tuple::new(Label::from_u128(1), Label::from_u128(2), Value::utf8("x"), Label::from_u128(3), 4);
    sim.store(5, t.clone()).unwrap();
    assert_eq!(sim.global_oracle_scan(&FilterTemplate::ground(&t)), BTreeSet::from([t.clone()]));
    let holders = sim.holders(&t);
    assert_eq!(holders.len(), 8.min(sim.config().k));
}

#[test]
fn one_store_uses_a_bounded_number_of_messages() {
    let mut sim = spawn_network(SimConfig::with_peers(64, 2));
    sim.run_until_idle().unwrap();
    let k = sim.config().k as u64;
    let alpha = sim.config().alpha as u64;
    let before = sim.stats();
    let t = Tuple::new(Label::from_u128(9), Label::from_u128(8), Label::from_u128(7), Label::from_u128(6), 0);
    let receipt = sim.store(10, t.clone()).unwrap();
    let after = sim.stats();
    let requests = after.requests_sent - before.requests_sent;
    // At most one FIND_NODE per candidate ever considered, bounded by
    // K + ALPHA per round over a handful of rounds, plus K STOREs.
    assert!(requests <= k * alpha + k, "{requests} requests");
    assert_eq!(receipt.replicas.len(), 20);
    let mut want = sim.true_closest(&tuple_address(&t), 20);
    let mut got = receipt.replicas.clone();
    want.sort();
    got.sort();
    assert_eq!(got, want);
}

#[test]
fn routing_tables_pass_audit_at_64_peers() {
    let sim = spawn_network(SimConfig::with_peers(64, 3));
    assert_eq!(sim.join_failures(), 0);
    sim.audit_routing().unwrap();
    assert!(sim.peers().all(|p| !p.routing.is_empty()));
}

#[test]
fn wildcard_lookups_equal_the_oracle_with_jittered_latency() {
    let cfg = SimConfig { latency: Latency::Uniform { min: 1_000, max: 50_000 }, ..SimConfig::with_peers(32, 4) };
    let mut sim = spawn_network(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let tuples = random_tuples(&mut rng, &WorkloadSpec { tuples: 300, predicates: Some(4), value_percent: 30 });
    for t in &tuples {
        sim.store(rng.gen_range(0..32), t.clone()).unwrap();
    }
    for w in [1, 2, 2, 3] {
        let f = random_template(&mut rng, &tuples, w);
        let got: BTreeSet<Tuple> =
            sim.lookup_wildcard(rng.gen_range(0..32), &pattern_address(&f)).unwrap().tuples.into_iter().collect();
        assert_eq!(got, sim.global_oracle_scan(&f));
    }
}

#[test]
fn conservation_no_phantom_tuples() {
    let mut sim = spawn_network(SimConfig::with_peers(16, 5));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let tuples = random_tuples(&mut rng, &WorkloadSpec { tuples: 100, ..Default::default() });
    for t in &tuples {
        sim.store(rng.gen_range(0..16), t.clone()).unwrap();
    }
    let published: BTreeSet<Tuple> = tuples.iter().cloned().collect();
    let stored = sim.global_oracle_scan(&FilterTemplate::any());
    assert_eq!(stored, published);
    assert!(tuples.iter().all(|t| !sim.holders(t).is_empty()));
}

#[test]
fn equal_configs_give_equal_stores_and_deliveries() {
    let run = || {
        let cfg = SimConfig { drop_rate: 0.05, latency: Latency::Uniform { min: 1, max: 20_000 }, ..SimConfig::with_peers(12, 6) };
        let mut sim = spawn_network(cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let tuples = random_tuples(&mut rng, &WorkloadSpec { tuples: 60, predicates: Some(2), value_percent: 0 });
        let f = FilterTemplate::ground(&tuples[0]).relax(0).relax(2).relax(3);
        let sid = sim.node(3).subscribe_template(&f).unwrap();
        let receipts: Vec<_> = sim.node(1).publish(tuples, None).into_iter().map(|r| r.is_ok()).collect();
        sim.run_for(3 * sim.config().period).unwrap();
        let deliveries = sim.node(3).poll(sid, usize::MAX).unwrap();
        let stores: Vec<Vec<Tuple>> = sim.peers().map(|p| p.store.iter().cloned().collect()).collect();
        (receipts, deliveries, stores, sim.stats())
    };
    assert_eq!(run(), run());
}

#[test]
fn total_message_loss_makes_a_store_fail() {
    let mut sim = spawn_network(SimConfig { drop_rate: 1.0, ..SimConfig::with_peers(5, 7) });
    let t = Tuple::new(Label::from_u128(1), Label::from_u128(2), Label::from_u128(3), Label::from_u128(4), 0);
    match sim.store(3, t) {
        Err(SimError::Dht(DhtError::NoPeers | DhtError::NetworkUnreachable)) => {}
        other => panic!("{other:?}"),
    }
}

/// The room data used throughout the pub/sub tests.
struct Room {
    names: NameDirectory,
    tuples: Vec<Tuple>,
}

fn room() -> Room {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut names = NameDirectory::new();
    for n in ["isIn", "name", "likesSong", "alice", "bob", "carol", "labA", "labB", "s1", "s2", "s3", "ctx"] {
        names.intern(n, &mut rng);
    }
    let l = |n: &str| names.resolve(n).unwrap();
    let ctx = l("ctx");
    let t = |s: &str, p: &str, o: NodeRef| Tuple::new(l(s), l(p), o, ctx, 1);
    let tuples = vec![
        t("labA", "name", Value::utf8("Lab A").into()),
        t("labB", "name", Value::utf8("Lab B").into()),
        t("alice", "isIn", l("labA").into()),
        t("bob", "isIn", l("labB").into()),
        t("carol", "isIn", l("labA").into()),
        t("alice", "likesSong", l("s1").into()),
        t("bob", "likesSong", l("s2").into()),
        t("carol", "likesSong", l("s3").into()),
        t("carol", "likesSong", l("s1").into()),
    ];
    Room { names, tuples }
}

const SAMPLE: &str = "SUBSCRIBE ?s WHERE ?p isIn ?r. ?r name 'Lab A'. ?p likesSong ?s";

fn bindings(ds: Vec<Delivery>) -> BTreeSet<Binding> {
    ds.into_iter()
        .map(|d| match d {
            Delivery::Binding(b) => b,
            Delivery::Tuple(t) => panic!("tuple {t:?} from a query session"),
        })
        .collect()
}

#[test]
fn sample_query_over_room_data_matches_the_oracle() {
    let room = room();
    let q = parse_query(SAMPLE, &room.names).unwrap();
    let oracle = support::nested_loop_join(&q, &room.tuples);
    let s = |n: &str| room.names.resolve(n).unwrap();
    let want: BTreeSet<Binding> = [s("s1"), s("s3")].into_iter().map(|x| [("s", NodeRef::Vertex(x))].into_iter().collect()).collect();
    assert_eq!(oracle, want);

    let mut sim = spawn_network(SimConfig::with_peers(16, 8));
    // Half the data before subscribing, half after.
    let (before, after) = room.tuples.split_at(4);
    sim.node(0).publish(before.to_vec(), None);
    let a = sim.node(7).subscribe_query(SAMPLE, &room.names).unwrap();
    let b = sim.node(9).subscribe_query(SAMPLE, &room.names).unwrap();
    sim.run_for(sim.config().period / 2).unwrap();
    sim.node(3).publish(after.to_vec(), None);
    sim.run_for(2 * sim.config().period).unwrap();
    let got_a = bindings(sim.node(7).poll(a, usize::MAX).unwrap());
    let got_b = bindings(sim.node(9).poll(b, usize::MAX).unwrap());
    assert_eq!(got_a, want);
    assert_eq!(got_a, got_b);
}

#[test]
fn unknown_names_are_reported_with_their_position() {
    let room = room();
    let mut sim = spawn_network(SimConfig::with_peers(2, 9));
    let err = sim.node(0).subscribe_query("SUBSCRIBE ?s WHERE ?p livesIn ?r", &room.names).unwrap_err();
    assert!(err.to_string().contains("livesIn"), "{err}");
}
