// SPDX-License-Identifier: Apache-2.0

//! Address balance across many seeds: 10 000 tuples with 5 predicates over
//! 64 evenly spaced peers. Prints how many seeds stay within 2x the mean
//! load and how the worst seed's predicates fall into the top address bits.

use infonet::dht::address_balance_report;
use infonet::{new_label, Label, Tuple};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let mut pass = 0;
    let mut worst = (0.0f64, 0u64);
    let mut best = f64::MAX;
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let preds: Vec<Label> = (0..5).map(|_| new_label(&mut rng)).collect();
        let ts: Vec<Tuple> = (0..10_000)
            .map(|_| {
                let p = *preds.choose(&mut rng).unwrap();
                Tuple::new(new_label(&mut rng), p, new_label(&mut rng), new_label(&mut rng), 0)
            })
            .collect();
        let r = address_balance_report(&ts, 64);
        if r.max_over_mean <= 2.0 {
            pass += 1;
        }
        if r.max_over_mean > worst.0 {
            worst = (r.max_over_mean, seed);
        }
        best = best.min(r.max_over_mean);
        // Predicate bits that land at address bits 1 and 5, inside the
        // 6-bit prefix that picks one of 64 peers.
        let groups: Vec<u8> = preds.iter().map(|p| (p.bit(127) as u8) << 1 | p.bit(126) as u8).collect();
        println!("seed {seed:3}: max/mean {:.3} predicate groups {groups:?}", r.max_over_mean);
    }
    println!("within 2x: {pass}/{seeds}, best {best:.3}, worst {:.3} (seed {})", worst.0, worst.1);
}
