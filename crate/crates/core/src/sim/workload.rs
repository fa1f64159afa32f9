// SPDX-License-Identifier: Apache-2.0

//! Random tuples and templates for exercising a network.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::filter::{FilterTemplate, Slot};
use crate::label::{new_label, Label};
use crate::tuple::Tuple;
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkloadSpec {
    pub tuples: usize,
    /// Size of the predicate vocabulary; `None` draws every predicate fresh.
    pub predicates: Option<usize>,
    /// Fraction, in percent, of tuples whose object is a value.
    pub value_percent: u8,
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        WorkloadSpec { tuples: 1000, predicates: None, value_percent: 20 }
    }
}

pub fn random_tuples<R: Rng + ?Sized>(rng: &mut R, spec: &WorkloadSpec) -> Vec<Tuple> {
    let vocab: Vec<Label> = (0..spec.predicates.unwrap_or(0)).map(|_| new_label(rng)).collect();
    (0..spec.tuples)
        .map(|i| {
            let s = new_label(rng);
            let p = match vocab.choose(rng) {
                Some(p) => *p,
                None => new_label(rng),
            };
            let c = new_label(rng);
            let ts = i as u64;
            if rng.gen_range(0..100) < spec.value_percent {
                Tuple::new(s, p, Value::int64(rng.gen()), c, ts)
            } else {
                Tuple::new(s, p, new_label(rng), c, ts)
            }
        })
        .collect()
}

/// A template made from a random tuple of `from` with `wildcards` of its
/// four slots relaxed to `*`.
pub fn random_template<R: Rng + ?Sized>(rng: &mut R, from: &[Tuple], wildcards: usize) -> FilterTemplate {
    let t = from.choose(rng).expect("non-empty tuple set");
    let mut f = FilterTemplate::ground(t);
    let mut slots = [0usize, 1, 2, 3];
    slots.shuffle(rng);
    for &i in &slots[..wildcards.min(4)] {
        f = f.relax(i);
    }
    f
}

/// Whether any slot of `f` holds a value.
pub fn has_value_slot(f: &FilterTemplate) -> bool {
    f.slots().iter().any(|s| matches!(s, Slot::Value(_)))
}
