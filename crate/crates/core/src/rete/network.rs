// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::filter::{matches, selectivity_rank, FilterTemplate, Slot};
use crate::rete::query::{Query, Term, TriplePattern};
use crate::tuple::{NodeRef, Tuple};
use crate::wire::{canonical_hash, TupleHash};

/// Variable name to bound label or value.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Binding(BTreeMap<String, NodeRef>);

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &str) -> Option<&NodeRef> {
        self.0.get(var)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &NodeRef)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Bind `var`, failing if it is already bound to something else.
    pub fn bind(&mut self, var: &str, value: NodeRef) -> bool {
        match self.0.get(var) {
            Some(existing) => *existing == value,
            None => {
                self.0.insert(var.to_owned(), value);
                true
            }
        }
    }

    pub fn project(&self, vars: &[String]) -> Binding {
        Binding(vars.iter().filter_map(|v| Some((v.clone(), self.0.get(v)?.clone()))).collect())
    }

    fn agrees_on(&self, other: &Binding, vars: &[String]) -> bool {
        vars.iter().all(|v| self.0.get(v) == other.0.get(v))
    }

    fn merged(&self, other: &Binding) -> Binding {
        let mut m = self.0.clone();
        m.extend(other.0.iter().map(|(k, v)| (k.clone(), v.clone())));
        Binding(m)
    }
}

impl<S: Into<String>> FromIterator<(S, NodeRef)> for Binding {
    fn from_iter<I: IntoIterator<Item = (S, NodeRef)>>(iter: I) -> Self {
        Binding(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

impl fmt::Debug for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match v {
                NodeRef::Vertex(l) => write!(f, "?{k}→{l}")?,
                NodeRef::Value(x) => write!(f, "?{k}→{x:?}")?,
            }
        }
        f.write_str("}")
    }
}

/// Bindings a tuple induces for a pattern, or `None` when a repeated
/// variable would be bound to two different components.
pub fn extract_binding(p: &TriplePattern, t: &Tuple) -> Option<Binding> {
    let mut b = Binding::new();
    let components = [NodeRef::Vertex(t.subject()), NodeRef::Vertex(t.predicate()), t.object().clone()];
    for (term, comp) in p.terms().into_iter().zip(components) {
        match term {
            Term::Var(v) => {
                if !b.bind(v, comp) {
                    return None;
                }
            }
            Term::Label(l) => {
                if comp != NodeRef::Vertex(*l) {
                    return None;
                }
            }
            Term::Value(x) => {
                if comp.as_value() != Some(x) {
                    return None;
                }
            }
        }
    }
    Some(b)
}

fn template_for(p: &TriplePattern) -> FilterTemplate {
    let slot = |t: &Term| match t {
        Term::Var(_) => Slot::Wildcard,
        Term::Label(l) => Slot::Label(*l),
        Term::Value(v) => Slot::Value(v.clone()),
    };
    FilterTemplate::new(slot(&p.subject), slot(&p.predicate), slot(&p.object), Slot::Wildcard)
        .expect("query patterns keep values in the object position")
}

/// One low-level subscription per pattern: variables become wildcards and
/// the context slot is left open.
pub fn derive_alpha_templates(q: &Query) -> Vec<FilterTemplate> {
    q.patterns().iter().map(template_for).collect()
}

/// Reorder patterns so that selective ones come first while keeping each
/// pattern connected to an earlier one where possible. Ties keep their
/// original order.
pub fn reorder_patterns(q: &Query) -> Query {
    let ranks: Vec<usize> = derive_alpha_templates(q).iter().map(selectivity_rank).collect();
    let mut remaining: Vec<usize> = (0..q.patterns().len()).collect();
    let mut order = Vec::with_capacity(remaining.len());
    let mut bound: HashSet<&str> = HashSet::new();
    while !remaining.is_empty() {
        let connected = |i: &usize| q.patterns()[*i].vars().iter().any(|v| bound.contains(v));
        let pool: Vec<usize> = if order.is_empty() {
            remaining.clone()
        } else {
            let c: Vec<usize> = remaining.iter().copied().filter(connected).collect();
            if c.is_empty() {
                remaining.clone()
            } else {
                c
            }
        };
        // max_by_key keeps the last maximum, so scan in reverse for stability.
        let pick = *pool.iter().rev().max_by_key(|i| ranks[**i]).expect("pool is non-empty");
        remaining.retain(|i| *i != pick);
        bound.extend(q.patterns()[pick].vars());
        order.push(pick);
    }
    q.with_patterns(order.into_iter().map(|i| q.patterns()[i].clone()).collect())
}

#[derive(Debug, Clone)]
pub struct AlphaMemory {
    template: FilterTemplate,
    pattern: TriplePattern,
    seen: HashSet<TupleHash>,
    tuples: Vec<Tuple>,
    /// Pattern bindings of the accepted tuples that are self-consistent.
    entries: Vec<Binding>,
}

impl AlphaMemory {
    pub fn template(&self) -> &FilterTemplate {
        &self.template
    }

    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }
}

#[derive(Debug, Clone, Default)]
pub struct BetaMemory {
    set: HashSet<Binding>,
    order: Vec<Binding>,
}

impl BetaMemory {
    fn insert(&mut self, b: Binding) -> bool {
        if self.set.insert(b.clone()) {
            self.order.push(b);
            true
        } else {
            false
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn bindings(&self) -> &[Binding] {
        &self.order
    }
}

#[derive(Debug, Clone)]
pub struct JoinVertex {
    vars: Vec<String>,
}

impl JoinVertex {
    pub fn join_vars(&self) -> &[String] {
        &self.vars
    }
}

/// A left-deep RETE dataflow network:
/// `BM0 → JV1(AM1) → BM1 → JV2(AM2) → … → BMn`.
///
/// Alpha memory `i` feeds join vertex `i`, which joins it with beta memory
/// `i` and writes into beta memory `i + 1`. The last beta memory holds the
/// complete solutions. Memories only grow.
#[derive(Debug, Clone)]
pub struct ReteNetwork {
    projected: Vec<String>,
    alphas: Vec<AlphaMemory>,
    betas: Vec<BetaMemory>,
    joins: Vec<JoinVertex>,
    emitted: HashSet<Binding>,
}

pub fn compile(q: &Query) -> ReteNetwork {
    let mut alphas = Vec::new();
    let mut joins = Vec::new();
    let mut earlier: Vec<String> = Vec::new();
    for p in q.patterns() {
        let vars = p.vars();
        joins.push(JoinVertex { vars: earlier.iter().filter(|v| vars.contains(v.as_str())).cloned().collect() });
        for v in vars {
            if !earlier.iter().any(|e| e == v) {
                earlier.push(v.to_owned());
            }
        }
        alphas.push(AlphaMemory {
            template: template_for(p),
            pattern: p.clone(),
            seen: HashSet::new(),
            tuples: Vec::new(),
            entries: Vec::new(),
        });
    }
    let mut betas = vec![BetaMemory::default(); q.patterns().len() + 1];
    betas[0].insert(Binding::new());
    ReteNetwork { projected: q.projected().to_vec(), alphas, betas, joins, emitted: HashSet::new() }
}

impl ReteNetwork {
    pub fn alpha_memories(&self) -> &[AlphaMemory] {
        &self.alphas
    }

    pub fn beta_memories(&self) -> &[BetaMemory] {
        &self.betas
    }

    pub fn join_vertices(&self) -> &[JoinVertex] {
        &self.joins
    }

    pub fn templates(&self) -> Vec<FilterTemplate> {
        self.alphas.iter().map(|a| a.template.clone()).collect()
    }

    /// Every projected result emitted so far.
    pub fn results(&self) -> &HashSet<Binding> {
        &self.emitted
    }

    /// Push one tuple through the network and return the projected results
    /// it completes for the first time.
    pub fn feed(&mut self, t: &Tuple) -> Vec<Binding> {
        let mut out = Vec::new();
        let mut hash = None;
        for i in 0..self.alphas.len() {
            if !matches(&self.alphas[i].template, t) {
                continue;
            }
            let h = *hash.get_or_insert_with(|| canonical_hash(t));
            let am = &mut self.alphas[i];
            if !am.seen.insert(h) {
                continue;
            }
            am.tuples.push(t.clone());
            if let Some(b) = extract_binding(&am.pattern, t) {
                am.entries.push(b.clone());
                self.right_activate(i, &b, &mut out);
            }
        }
        out
    }

    fn right_activate(&mut self, i: usize, entry: &Binding, out: &mut Vec<Binding>) {
        let mut k = 0;
        while k < self.betas[i].order.len() {
            let left = &self.betas[i].order[k];
            if left.agrees_on(entry, &self.joins[i].vars) {
                let joined = left.merged(entry);
                self.insert_beta(i + 1, joined, out);
            }
            k += 1;
        }
    }

    fn left_activate(&mut self, i: usize, partial: &Binding, out: &mut Vec<Binding>) {
        let mut k = 0;
        while k < self.alphas[i].entries.len() {
            let entry = &self.alphas[i].entries[k];
            if partial.agrees_on(entry, &self.joins[i].vars) {
                let joined = partial.merged(entry);
                self.insert_beta(i + 1, joined, out);
            }
            k += 1;
        }
    }

    fn insert_beta(&mut self, j: usize, b: Binding, out: &mut Vec<Binding>) {
        if !self.betas[j].insert(b.clone()) {
            return;
        }
        if j == self.alphas.len() {
            let projected = b.project(&self.projected);
            if self.emitted.insert(projected.clone()) {
                out.push(projected);
            }
        } else {
            self.left_activate(j, &b, out);
        }
    }
}
