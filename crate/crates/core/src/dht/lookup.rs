// SPDX-License-Identifier: Apache-2.0

//! The iterative Kademlia lookup as a transport-free state machine.
//!
//! The caller asks for the next batch of peers to query, reports responses
//! and failures, and stops when [`IterativeLookup::is_done`]. At most `alpha`
//! requests are in flight. The lookup finishes once the `k` closest
//! candidates that have not failed have all answered.

use crate::dht::routing::{Contact, Distance, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Fresh,
    InFlight,
    Answered,
    Failed,
}

#[derive(Debug, Clone)]
struct Candidate {
    contact: Contact,
    distance: Distance,
    state: State,
}

#[derive(Debug, Clone)]
pub struct IterativeLookup {
    target: NodeId,
    k: usize,
    alpha: usize,
    /// Sorted by distance to the target.
    candidates: Vec<Candidate>,
    in_flight: usize,
    remote_answers: usize,
    remote_queries: usize,
    own: NodeId,
}

impl IterativeLookup {
    /// Start a lookup from `own`, which counts as already answered, seeded
    /// with contacts from the local routing table.
    pub fn new(target: NodeId, k: usize, alpha: usize, own: Contact, seeds: impl IntoIterator<Item = Contact>) -> Self {
        let mut l = IterativeLookup {
            target,
            k,
            alpha: alpha.max(1),
            candidates: Vec::new(),
            in_flight: 0,
            remote_answers: 0,
            remote_queries: 0,
            own: own.id,
        };
        l.add(own, State::Answered);
        for c in seeds {
            l.add(c, State::Fresh);
        }
        l
    }

    fn add(&mut self, c: Contact, state: State) {
        if self.candidates.iter().any(|x| x.contact.id == c.id) {
            return;
        }
        let distance = c.id.distance(&self.target);
        let pos = self.candidates.partition_point(|x| x.distance < distance);
        self.candidates.insert(pos, Candidate { contact: c, distance, state });
    }

    pub fn target(&self) -> NodeId {
        self.target
    }

    /// Claim up to `alpha - in_flight` fresh candidates among the `k`
    /// closest live ones.
    pub fn next_queries(&mut self) -> Vec<Contact> {
        let mut out = Vec::new();
        let mut live = 0;
        for c in self.candidates.iter_mut() {
            if self.in_flight >= self.alpha || live >= self.k {
                break;
            }
            if c.state == State::Failed {
                continue;
            }
            live += 1;
            if c.state == State::Fresh {
                c.state = State::InFlight;
                self.in_flight += 1;
                self.remote_queries += 1;
                out.push(c.contact);
            }
        }
        out
    }

    fn settle(&mut self, id: &NodeId, to: State) -> bool {
        match self.candidates.iter_mut().find(|c| c.contact.id == *id) {
            Some(c) if c.state == State::InFlight => {
                c.state = to;
                self.in_flight -= 1;
                true
            }
            _ => false,
        }
    }

    /// Record an answer from `from` carrying `closer` contacts.
    pub fn on_response(&mut self, from: &NodeId, closer: impl IntoIterator<Item = Contact>) {
        if !self.settle(from, State::Answered) {
            return;
        }
        self.remote_answers += 1;
        for c in closer {
            if c.id != self.own {
                self.add(c, State::Fresh);
            }
        }
    }

    pub fn on_failure(&mut self, from: &NodeId) {
        self.settle(from, State::Failed);
    }

    pub fn in_flight(&self) -> usize {
        self.in_flight
    }

    pub fn is_done(&self) -> bool {
        self.in_flight == 0
            && self.candidates.iter().filter(|c| c.state != State::Failed).take(self.k).all(|c| c.state == State::Answered)
    }

    /// The `k` closest candidates that answered (including the origin).
    pub fn closest_answered(&self) -> Vec<Contact> {
        self.candidates.iter().filter(|c| c.state == State::Answered).take(self.k).map(|c| c.contact).collect()
    }

    pub fn remote_queries(&self) -> usize {
        self.remote_queries
    }

    pub fn remote_answers(&self) -> usize {
        self.remote_answers
    }

    /// True when remote peers were tried and none of them answered.
    pub fn unreachable(&self) -> bool {
        self.remote_queries > 0 && self.remote_answers == 0
    }
}
