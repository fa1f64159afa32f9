// SPDX-License-Identifier: Apache-2.0

//! Publish and subscribe on top of the DHT and the RETE engine.
//!
//! Publishing stores each tuple in the DHT and needs no session. A
//! subscription is a session that re-issues wildcard lookups every `period`
//! of virtual time and queues whatever it has not delivered before. Query
//! sessions run one lookup per alpha template and feed the results into a
//! RETE network local to the subscriber, so joins happen at the edge.

use std::collections::{BTreeMap, HashSet, VecDeque};

use crate::dht::{pattern_address, DhtError, InterleavedAddress, LookupPattern, NodeId};
use crate::filter::FilterTemplate;
use crate::names::NameDirectory;
use crate::rete::{compile, parse_query, Binding, Query, QueryError, ReteNetwork};
use crate::signing::{sign_tuple, KeyPair};
use crate::sim::{FoundTuples, Sim, SimError};
use crate::tuple::{Tuple, TupleError};
use crate::wire::{canonical_hash, TupleHash};

pub type SessionId = u64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NodeError {
    #[error("malformed tuple: {0}")]
    Malformed(#[from] TupleError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Dht(#[from] DhtError),
    #[error(transparent)]
    Sim(SimError),
    #[error("session {0} is closed")]
    SessionClosed(SessionId),
    #[error("no session {0}")]
    UnknownSession(SessionId),
}

impl From<SimError> for NodeError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Dht(d) => NodeError::Dht(d),
            other => NodeError::Sim(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublishReceipt {
    pub hash: TupleHash,
    pub address: InterleavedAddress,
    pub replicas: Vec<NodeId>,
    /// The tuple as stored, signed if a key was given.
    pub tuple: Tuple,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Delivery {
    Tuple(Tuple),
    Binding(Binding),
}

#[derive(Debug)]
enum SessionKind {
    Template { pattern: LookupPattern },
    Query { net: Box<ReteNetwork>, patterns: Vec<LookupPattern> },
}

#[derive(Debug)]
struct Session {
    kind: SessionKind,
    seen: HashSet<TupleHash>,
    period: u64,
    queue: VecDeque<Delivery>,
    dropped: u64,
    open: bool,
    error: Option<DhtError>,
}

impl Session {
    fn push(&mut self, d: Delivery, cap: Option<usize>) {
        self.queue.push_back(d);
        if let Some(cap) = cap {
            while self.queue.len() > cap {
                self.queue.pop_front();
                self.dropped += 1;
            }
        }
    }
}

/// Per-peer session table, owned by the simulator.
#[derive(Debug, Default)]
pub(crate) struct NodeState {
    sessions: BTreeMap<SessionId, Session>,
    next: SessionId,
}

impl NodeState {
    /// Period and lookups for the next tick of an open session.
    pub(crate) fn poll_plan(&self, id: SessionId) -> Option<(u64, Vec<(usize, LookupPattern)>)> {
        let s = self.sessions.get(&id).filter(|s| s.open)?;
        let lookups = match &s.kind {
            SessionKind::Template { pattern } => vec![(0, *pattern)],
            SessionKind::Query { patterns, .. } => patterns.iter().copied().enumerate().collect(),
        };
        Some((s.period, lookups))
    }

    pub(crate) fn on_found(
        &mut self,
        id: SessionId,
        _template: usize,
        res: Result<FoundTuples, DhtError>,
        cap: Option<usize>,
    ) {
        let Some(s) = self.sessions.get_mut(&id).filter(|s| s.open) else { return };
        let found = match res {
            Ok(f) => f,
            Err(e) => {
                s.error = Some(e);
                return;
            }
        };
        for t in found.tuples {
            if !s.seen.insert(canonical_hash(&t)) {
                continue;
            }
            match &mut s.kind {
                SessionKind::Template { .. } => s.push(Delivery::Tuple(t), cap),
                SessionKind::Query { net, .. } => {
                    for b in net.feed(&t) {
                        s.push(Delivery::Binding(b), cap);
                    }
                }
            }
        }
    }

    fn open(&mut self, kind: SessionKind, period: u64) -> SessionId {
        let id = self.next;
        self.next += 1;
        let session = Session {
            kind,
            seen: HashSet::new(),
            period,
            queue: VecDeque::new(),
            dropped: 0,
            open: true,
            error: None,
        };
        self.sessions.insert(id, session);
        id
    }

    fn get(&self, id: SessionId) -> Result<&Session, NodeError> {
        self.sessions.get(&id).ok_or(NodeError::UnknownSession(id))
    }
}

/// The operation surface of one peer. Agents built on the network see only
/// this.
pub struct NodeApi<'a> {
    sim: &'a mut Sim,
    peer: usize,
}

impl<'a> NodeApi<'a> {
    pub(crate) fn new(sim: &'a mut Sim, peer: usize) -> Self {
        NodeApi { sim, peer }
    }

    pub fn peer(&self) -> usize {
        self.peer
    }

    /// Current virtual time in microseconds.
    pub fn now(&self) -> u64 {
        self.sim.now()
    }

    /// Store each tuple, signing it first when `kp` is given. One result per
    /// input; a failure does not stop the rest.
    pub fn publish(
        &mut self,
        ts: impl IntoIterator<Item = Tuple>,
        kp: Option<&KeyPair>,
    ) -> Vec<Result<PublishReceipt, NodeError>> {
        ts.into_iter().map(|t| self.publish_one(t, kp)).collect()
    }

    fn publish_one(&mut self, t: Tuple, kp: Option<&KeyPair>) -> Result<PublishReceipt, NodeError> {
        let t = match kp {
            Some(kp) => sign_tuple(&t, kp)?,
            None => t,
        };
        let r = self.sim.store(self.peer, t.clone())?;
        Ok(PublishReceipt { hash: canonical_hash(&t), address: r.address, replicas: r.replicas, tuple: t })
    }

    pub fn subscribe_template(&mut self, f: &FilterTemplate) -> Result<SessionId, NodeError> {
        self.subscribe_template_every(f, self.sim.config().period)
    }

    pub fn subscribe_template_every(&mut self, f: &FilterTemplate, period: u64) -> Result<SessionId, NodeError> {
        let pattern = pattern_address(f);
        self.check_budget(&pattern)?;
        Ok(self.open(SessionKind::Template { pattern }, period))
    }

    pub fn subscribe_query(&mut self, text: &str, names: &NameDirectory) -> Result<SessionId, NodeError> {
        let q = parse_query(text, names)?;
        self.subscribe_compiled(&q, self.sim.config().period)
    }

    pub fn subscribe_compiled(&mut self, q: &Query, period: u64) -> Result<SessionId, NodeError> {
        let net = compile(q);
        let patterns: Vec<LookupPattern> = net.templates().iter().map(pattern_address).collect();
        for p in &patterns {
            self.check_budget(p)?;
        }
        Ok(self.open(SessionKind::Query { net: Box::new(net), patterns }, period))
    }

    fn check_budget(&self, p: &LookupPattern) -> Result<(), NodeError> {
        self.sim.branch_targets(p, self.sim.width_params()).map(|_| ()).map_err(NodeError::from)
    }

    fn open(&mut self, kind: SessionKind, period: u64) -> SessionId {
        assert!(period > 0, "re-query period must be positive");
        let id = self.sim.peers[self.peer].node.open(kind, period);
        // The first lookups, issued now, are the historic snapshot.
        self.sim.start_session(self.peer, id);
        id
    }

    /// Remove and return up to `max` queued deliveries, oldest first.
    pub fn poll(&mut self, session: SessionId, max: usize) -> Result<Vec<Delivery>, NodeError> {
        let s = self.sim.peers[self.peer].node.sessions.get_mut(&session).ok_or(NodeError::UnknownSession(session))?;
        if !s.open {
            return Err(NodeError::SessionClosed(session));
        }
        let n = max.min(s.queue.len());
        Ok(s.queue.drain(..n).collect())
    }

    /// Close a session and discard its queue. Closing twice is a no-op.
    pub fn unsubscribe(&mut self, session: SessionId) {
        if let Some(s) = self.sim.peers[self.peer].node.sessions.get_mut(&session) {
            s.open = false;
            s.queue.clear();
        }
    }

    /// The most recent lookup failure of a session, if any.
    pub fn session_error(&self, session: SessionId) -> Result<Option<DhtError>, NodeError> {
        Ok(self.sim.peers[self.peer].node.get(session)?.error.clone())
    }

    /// Deliveries discarded because the queue cap was exceeded.
    pub fn dropped(&self, session: SessionId) -> Result<u64, NodeError> {
        Ok(self.sim.peers[self.peer].node.get(session)?.dropped)
    }

    pub fn queued(&self, session: SessionId) -> Result<usize, NodeError> {
        Ok(self.sim.peers[self.peer].node.get(session)?.queue.len())
    }
}
