// SPDX-License-Identifier: Apache-2.0

//! Generators and brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use infonet::rete::{Binding, Query, Term, TriplePattern};
use infonet::value::ValueType;
use infonet::{new_label, sign_tuple, KeyPair, Label, NodeRef, Tuple, Value};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn random_value<R: Rng>(rng: &mut R) -> Value {
    match rng.gen_range(0..6) {
        0 => {
            let len = rng.gen_range(0..24);
            let s: String = (0..len).map(|_| rng.gen_range('a'..='z')).collect();
            Value::utf8(s)
        }
        1 => Value::bytes((0..rng.gen_range(0..40)).map(|_| rng.gen()).collect::<Vec<u8>>()),
        2 => Value::int64(rng.gen()),
        3 => Value::float64(rng.gen::<f64>() * 1e6 - 5e5),
        4 => Value::timestamp(rng.gen()),
        _ => {
            let payload: Vec<u8> = (0..rng.gen_range(0..16)).map(|_| rng.gen()).collect();
            Value::new(ValueType::Unknown(new_label(rng)), payload).unwrap()
        }
    }
}

/// A tuple covering every flag combination: label or value object, signed
/// or not.
pub fn random_tuple<R: Rng>(rng: &mut R, keys: &[KeyPair]) -> Tuple {
    let o: NodeRef = if rng.gen_bool(0.5) { random_value(rng).into() } else { new_label(rng).into() };
    let t = infonet::make_tuple(new_label(rng), new_label(rng), o, new_label(rng), rng.gen()).unwrap();
    match keys.choose(rng) {
        Some(kp) if rng.gen_bool(0.5) => sign_tuple(&t, kp).unwrap(),
        _ => t,
    }
}

pub fn keys(n: usize) -> Vec<KeyPair> {
    (0..n).map(|i| KeyPair::from_seed(Label::from_u128(0xbeef + i as u128), [i as u8 + 1; 32])).collect()
}

/// Bit `j` (from the most significant) of component `m` lands at address
/// bit `4j + m`. Computed one bit at a time on integers.
pub fn interleave_oracle(c: [u128; 4]) -> Vec<bool> {
    let mut bits = vec![false; 512];
    for (m, comp) in c.iter().enumerate() {
        for j in 0..128 {
            bits[4 * j + m] = (comp >> (127 - j)) & 1 == 1;
        }
    }
    bits
}

/// Small vocabulary so that random queries actually join.
pub struct Vocab {
    pub entities: Vec<Label>,
    pub predicates: Vec<Label>,
    pub values: Vec<Value>,
    pub contexts: Vec<Label>,
}

impl Vocab {
    pub fn new<R: Rng>(rng: &mut R) -> Self {
        Vocab {
            entities: (0..4).map(|_| new_label(rng)).collect(),
            predicates: (0..3).map(|_| new_label(rng)).collect(),
            values: vec![Value::utf8("Lab A"), Value::int64(7)],
            contexts: (0..2).map(|_| new_label(rng)).collect(),
        }
    }

    pub fn tuples<R: Rng>(&self, rng: &mut R, n: usize) -> Vec<Tuple> {
        let mut set = BTreeSet::new();
        for i in 0..n {
            let o: NodeRef = if rng.gen_bool(0.2) {
                self.values.choose(rng).unwrap().clone().into()
            } else {
                (*self.entities.choose(rng).unwrap()).into()
            };
            let s = *self.entities.choose(rng).unwrap();
            let p = *self.predicates.choose(rng).unwrap();
            let c = *self.contexts.choose(rng).unwrap();
            set.insert(Tuple::new(s, p, o, c, i as u64 % 3));
        }
        set.into_iter().collect()
    }

    fn term<R: Rng>(&self, rng: &mut R, vars: &[&str], pos: usize) -> Term {
        // Variables in the predicate position rarely join with anything.
        let var_odds = if pos == 1 { 0.15 } else { 0.75 };
        if rng.gen_bool(var_odds) {
            return Term::var(vars.choose(rng).unwrap());
        }
        match pos {
            1 => Term::Label(*self.predicates.choose(rng).unwrap()),
            2 if rng.gen_bool(0.3) => Term::Value(self.values.choose(rng).unwrap().clone()),
            _ => Term::Label(*self.entities.choose(rng).unwrap()),
        }
    }

    /// A valid query with up to `max_patterns` patterns over at most four
    /// variables.
    pub fn query<R: Rng>(&self, rng: &mut R, max_patterns: usize) -> Query {
        let all = ["a", "b", "c", "d"];
        loop {
            let nvars = rng.gen_range(1..=4);
            let vars = &all[..nvars];
            let patterns: Vec<TriplePattern> = (0..rng.gen_range(1..=max_patterns))
                .map(|_| {
                    TriplePattern::new(self.term(rng, vars, 0), self.term(rng, vars, 1), self.term(rng, vars, 2))
                })
                .collect();
            let used: BTreeSet<String> = patterns.iter().flat_map(|p| p.vars()).map(str::to_owned).collect();
            if used.is_empty() {
                continue;
            }
            let used: Vec<String> = used.into_iter().collect();
            let k = rng.gen_range(1..=used.len());
            let mut projected: Vec<String> = used.choose_multiple(rng, k).cloned().collect();
            projected.sort();
            if let Ok(q) = Query::new(projected, patterns) {
                return q;
            }
        }
    }
}

fn unify(term: &Term, value: &NodeRef, b: &mut Vec<(String, NodeRef)>) -> bool {
    match term {
        Term::Label(l) => value == &NodeRef::Vertex(*l),
        Term::Value(v) => value == &NodeRef::Value(v.clone()),
        Term::Var(name) => match b.iter().find(|(n, _)| n == name) {
            Some((_, bound)) => bound == value,
            None => {
                b.push((name.clone(), value.clone()));
                true
            }
        },
    }
}

/// Nested-loop join: every assignment of one tuple per pattern that agrees
/// on shared variables, projected. Contexts are ignored.
pub fn nested_loop_join(q: &Query, tuples: &[Tuple]) -> BTreeSet<Binding> {
    fn go(
        q: &Query,
        tuples: &[Tuple],
        i: usize,
        acc: &mut Vec<(String, NodeRef)>,
        out: &mut BTreeSet<Binding>,
    ) {
        if i == q.patterns().len() {
            out.insert(acc.iter().filter(|(n, _)| q.projected().contains(n)).cloned().collect());
            return;
        }
        let p = &q.patterns()[i];
        for t in tuples {
            let mut b = acc.clone();
            let fields = [NodeRef::Vertex(t.subject()), NodeRef::Vertex(t.predicate()), t.object().clone()];
            if p.terms().iter().zip(&fields).all(|(term, v)| unify(term, v, &mut b)) {
                go(q, tuples, i + 1, &mut b, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    go(q, tuples, 0, &mut Vec::new(), &mut out);
    out
}
