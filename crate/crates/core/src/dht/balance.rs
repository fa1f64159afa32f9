// SPDX-License-Identifier: Apache-2.0

//! Load distribution of tuples over peers under a given addressing scheme.

use serde::Serialize;

use crate::dht::address::{tuple_address, InterleavedAddress};
use crate::dht::routing::NodeId;
use crate::tuple::Tuple;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceReport {
    pub peers: usize,
    pub tuples: usize,
    /// Tuples per peer, indexed by position in the evenly spaced id ring.
    pub counts: Vec<usize>,
    pub max: usize,
    pub mean: f64,
    pub max_over_mean: f64,
    /// Peers that received nothing.
    pub empty_peers: usize,
}

/// Concatenated (non-interleaved) address: subject ‖ predicate ‖ object ‖
/// context. Useful only as a baseline to compare against interleaving.
pub fn concatenated_address(t: &Tuple) -> InterleavedAddress {
    let comps = [t.subject(), t.predicate(), crate::dht::address::object_component(t.object()), t.context()];
    let mut b = [0u8; 64];
    for (i, c) in comps.iter().enumerate() {
        b[i * 16..(i + 1) * 16].copy_from_slice(c.as_bytes());
    }
    InterleavedAddress::from_bytes(b)
}

/// Assign each tuple to the XOR-closest of `peers` evenly spaced ids and
/// report per-peer counts.
pub fn address_balance_report(tuples: &[Tuple], peers: usize) -> BalanceReport {
    balance_with(tuples, peers, tuple_address)
}

pub fn balance_with(tuples: &[Tuple], peers: usize, addr: impl Fn(&Tuple) -> InterleavedAddress) -> BalanceReport {
    assert!(peers > 0, "need at least one peer");
    let ids: Vec<NodeId> = (0..peers).map(|i| NodeId::evenly_spaced(i, peers)).collect();
    let mut counts = vec![0usize; peers];
    for t in tuples {
        let a = NodeId::from(addr(t));
        let (best, _) = ids.iter().enumerate().min_by_key(|(_, id)| id.distance(&a)).expect("peers > 0");
        counts[best] += 1;
    }
    let max = counts.iter().copied().max().unwrap_or(0);
    let mean = tuples.len() as f64 / peers as f64;
    BalanceReport {
        peers,
        tuples: tuples.len(),
        max,
        mean,
        max_over_mean: if tuples.is_empty() { 0.0 } else { max as f64 / mean },
        empty_peers: counts.iter().filter(|&&c| c == 0).count(),
        counts,
    }
}

/// Histogram of the top `bits` address bits (2^bits bins).
pub fn prefix_histogram(tuples: &[Tuple], bits: u32, addr: impl Fn(&Tuple) -> InterleavedAddress) -> Vec<usize> {
    assert!(bits <= 16);
    let mut h = vec![0usize; 1 << bits];
    for t in tuples {
        let a = addr(t);
        let top = u16::from_be_bytes([a.as_bytes()[0], a.as_bytes()[1]]) >> (16 - bits);
        h[top as usize] += 1;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::{new_label, Label};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_tuple_is_trivially_placed() {
        let t = Tuple::new(Label::from_u128(1), Label::from_u128(2), Label::from_u128(3), Label::from_u128(4), 0);
        let r = address_balance_report(&[t], 64);
        assert_eq!(r.counts.iter().sum::<usize>(), 1);
        assert_eq!(r.max, 1);
    }

    #[test]
    fn uniform_tuples_are_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let ts: Vec<_> = (0..10_000)
            .map(|_| Tuple::new(new_label(&mut rng), new_label(&mut rng), new_label(&mut rng), new_label(&mut rng), 0))
            .collect();
        let r = address_balance_report(&ts, 64);
        assert_eq!(r.counts.iter().sum::<usize>(), 10_000);
        assert!(r.max_over_mean <= 2.0, "{}", r.max_over_mean);
    }

    #[test]
    fn evenly_spaced_assignment_is_top_bits_for_powers_of_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ts: Vec<_> = (0..500)
            .map(|_| Tuple::new(new_label(&mut rng), new_label(&mut rng), new_label(&mut rng), new_label(&mut rng), 0))
            .collect();
        let r = address_balance_report(&ts, 64);
        assert_eq!(r.counts, prefix_histogram(&ts, 6, tuple_address));
    }

    #[test]
    fn concatenation_baseline_layout() {
        let t = Tuple::new(Label::from_u128(1), Label::from_u128(2), Label::from_u128(3), Label::from_u128(4), 0);
        let a = concatenated_address(&t);
        assert_eq!(a.as_bytes()[15], 1);
        assert_eq!(a.as_bytes()[31], 2);
        assert_eq!(a.as_bytes()[63], 4);
    }
}
