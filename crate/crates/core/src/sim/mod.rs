// SPDX-License-Identifier: Apache-2.0

//! Deterministic discrete-event host for a network of peers.
//!
//! All time is virtual. Events are ordered by `(time, sequence number)` and
//! every random choice (node ids, latencies, message loss) comes from one
//! seeded generator, so equal configurations and equal scripted inputs give
//! byte-identical traces.
//!
//! Peers interact only by exchanging encoded [`rpc`](crate::dht::rpc)
//! messages through the event queue. Multi-step DHT operations (store,
//! lookups, joins) are state machines advanced by message deliveries and
//! timeouts.

mod config;
pub mod trace;
pub mod workload;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dht::rpc::{Body, Message};
use crate::dht::{
    tuple_address, Contact, DhtError, DhtPeer, EffectiveWidthParams, InterleavedAddress, IterativeLookup,
    LookupPattern, NodeId, PeerAddr,
};
use crate::filter::{matches, FilterTemplate};
use crate::node::{NodeApi, NodeState, SessionId};
use crate::tuple::Tuple;
use crate::wire;

pub use config::{Latency, ParseLatencyError, SimConfig};
pub use trace::TraceRecord;

use crate::dht::routing::Observed;

pub type OpId = u64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Dht(#[from] DhtError),
    #[error("event budget of {0} exhausted; the simulation may be livelocked")]
    EventBudgetExceeded(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoreReceipt {
    pub address: InterleavedAddress,
    /// Peers that acknowledged holding the tuple, origin included when it
    /// is among the closest.
    pub replicas: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoundTuples {
    /// Distinct tuples in canonical packet order.
    pub tuples: Vec<Tuple>,
    /// Number of routing branches the lookup fanned out into.
    pub branches: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpOutcome {
    Joined(Result<(), DhtError>),
    Stored(Result<StoreReceipt, DhtError>),
    Found(Result<FoundTuples, DhtError>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum OpOwner {
    Caller,
    Session { peer: usize, session: SessionId, template: usize },
}

#[derive(Debug)]
enum StorePhase {
    Locating(IterativeLookup),
    Replicating { pending: usize, replicas: Vec<NodeId> },
}

#[derive(Debug)]
enum OpKind {
    Join(IterativeLookup),
    Store { tuple: Tuple, address: InterleavedAddress, phase: StorePhase },
    Find { pattern: LookupPattern, branches: Vec<IterativeLookup>, found: BTreeMap<Vec<u8>, Tuple> },
}

#[derive(Debug)]
struct Op {
    origin: usize,
    owner: OpOwner,
    kind: OpKind,
}

#[derive(Debug, Clone, Copy)]
enum Purpose {
    Lookup { op: OpId, branch: usize },
    Replicate { op: OpId },
    Eviction { stale: NodeId, newcomer: Contact },
}

#[derive(Debug)]
struct PendingRpc {
    origin: usize,
    to: Contact,
    purpose: Purpose,
}

#[derive(Debug)]
enum Event {
    Deliver { to: PeerAddr, bytes: Vec<u8> },
    RpcTimeout { rpc: u64 },
    SessionTick { peer: usize, session: SessionId },
}

impl Event {
    fn is_periodic(&self) -> bool {
        matches!(self, Event::SessionTick { .. })
    }
}

#[derive(Debug)]
struct Scheduled {
    time: u64,
    seq: u64,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        (self.time, self.seq) == (other.time, other.seq)
    }
}
impl Eq for Scheduled {}
impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Scheduled {
    // Reversed so that BinaryHeap pops the earliest event.
    fn cmp(&self, other: &Self) -> Ordering {
        (other.time, other.seq).cmp(&(self.time, self.seq))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimStats {
    pub events: u64,
    pub requests_sent: u64,
    pub responses_sent: u64,
    pub messages_dropped: u64,
    pub timeouts: u64,
}

#[derive(Debug)]
pub struct PeerState {
    pub dht: DhtPeer,
    pub(crate) node: NodeState,
}

/// A running simulation.
#[derive(Debug)]
pub struct Sim {
    cfg: SimConfig,
    now: u64,
    seq: u64,
    queue: BinaryHeap<Scheduled>,
    periodic_pending: usize,
    /// Queued timeouts whose RPC has already been answered.
    inert: usize,
    rng: ChaCha8Rng,
    pub(crate) peers: Vec<PeerState>,
    ops: BTreeMap<OpId, Op>,
    outcomes: HashMap<OpId, OpOutcome>,
    next_op: OpId,
    next_rpc: u64,
    rpcs: HashMap<u64, PendingRpc>,
    evictions: BTreeSet<(usize, NodeId)>,
    trace: Option<Vec<TraceRecord>>,
    stats: SimStats,
    join_failures: usize,
}

/// Build a network: seed-derived node ids, then sequential joins through
/// peer 0 followed by one self-lookup refresh per peer.
pub fn spawn_network(cfg: SimConfig) -> Sim {
    Sim::spawn(cfg)
}

impl Sim {
    pub fn spawn(cfg: SimConfig) -> Sim {
        assert!(cfg.peers >= 1, "a network needs at least one peer");
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let peers = (0..cfg.peers)
            .map(|i| {
                let contact = Contact { id: NodeId::random(&mut rng), addr: PeerAddr(i as u32) };
                PeerState { dht: DhtPeer::new(contact, cfg.k), node: NodeState::default() }
            })
            .collect();
        let mut sim = Sim {
            trace: cfg.trace.then(Vec::new),
            cfg,
            now: 0,
            seq: 0,
            queue: BinaryHeap::new(),
            periodic_pending: 0,
            inert: 0,
            rng,
            peers,
            ops: BTreeMap::new(),
            outcomes: HashMap::new(),
            next_op: 0,
            next_rpc: 0,
            rpcs: HashMap::new(),
            evictions: BTreeSet::new(),
            stats: SimStats::default(),
            join_failures: 0,
        };
        let bootstrap = sim.peers[0].dht.contact;
        for i in 1..sim.peers.len() {
            sim.peers[i].dht.routing.observe(bootstrap);
            sim.join(i);
        }
        if sim.peers.len() > 1 {
            for i in 0..sim.peers.len() {
                sim.join(i);
            }
        }
        sim
    }

    fn join(&mut self, peer: usize) {
        let op = self.start_join(peer);
        // Joins are bounded; a budget failure here means a broken config.
        match self.run_until_done(op) {
            Ok(OpOutcome::Joined(Ok(()))) => {}
            _ => self.join_failures += 1,
        }
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn stats(&self) -> SimStats {
        self.stats
    }

    pub fn join_failures(&self) -> usize {
        self.join_failures
    }

    pub fn peer_count(&self) -> usize {
        self.peers.len()
    }

    pub fn peer(&self, i: usize) -> &DhtPeer {
        &self.peers[i].dht
    }

    pub fn peers(&self) -> impl Iterator<Item = &DhtPeer> {
        self.peers.iter().map(|p| &p.dht)
    }

    pub fn width_params(&self) -> EffectiveWidthParams {
        self.cfg.width_params()
    }

    /// The in-process node API of peer `i`.
    pub fn node(&mut self, i: usize) -> NodeApi<'_> {
        assert!(i < self.peers.len(), "no peer at index {i}");
        NodeApi::new(self, i)
    }

    pub fn trace(&self) -> Option<&[TraceRecord]> {
        self.trace.as_deref()
    }

    pub fn write_trace<W: std::io::Write>(&self, w: W) -> std::io::Result<()> {
        trace::write_jsonl(self.trace.as_deref().unwrap_or_default(), w)
    }

    pub fn pending_events(&self) -> usize {
        self.queue.len()
    }

    // --- event queue ---------------------------------------------------

    fn schedule(&mut self, at: u64, event: Event) {
        if event.is_periodic() {
            self.periodic_pending += 1;
        }
        self.seq += 1;
        self.queue.push(Scheduled { time: at, seq: self.seq, event });
    }

    /// Issue a session's first lookups now and start its periodic timer.
    pub(crate) fn start_session(&mut self, peer: usize, session: SessionId) {
        self.on_tick(peer, session);
    }

    fn record(&mut self, peer: u32, kind: impl Into<String>, payload: &[u8]) {
        if let Some(t) = self.trace.as_mut() {
            t.push(TraceRecord { time: self.now, peer, kind: kind.into(), digest: trace::digest(payload) });
        }
    }

    fn step(&mut self) -> bool {
        let Some(Scheduled { time, event, .. }) = self.queue.pop() else {
            return false;
        };
        if event.is_periodic() {
            self.periodic_pending -= 1;
        }
        self.now = self.now.max(time);
        self.stats.events += 1;
        match event {
            Event::Deliver { to, bytes } => self.on_deliver(to, &bytes),
            Event::RpcTimeout { rpc } => {
                if !self.rpcs.contains_key(&rpc) {
                    self.inert -= 1;
                }
                self.on_timeout(rpc)
            }
            Event::SessionTick { peer, session } => {
                self.record(peer as u32, "tick", &session.to_be_bytes());
                self.on_tick(peer, session);
            }
        }
        true
    }

    /// Process events until only periodic timers and the timeouts of already
    /// answered requests remain. Returns the virtual time that elapsed.
    pub fn run_until_idle(&mut self) -> Result<u64, SimError> {
        let start = self.now;
        let mut budget = self.cfg.event_budget;
        while self.queue.len() > self.periodic_pending + self.inert {
            if budget == 0 {
                return Err(SimError::EventBudgetExceeded(self.cfg.event_budget));
            }
            budget -= 1;
            self.step();
        }
        Ok(self.now - start)
    }

    /// Process every event scheduled at or before `t`, then set the clock
    /// to `t`.
    pub fn run_until(&mut self, t: u64) -> Result<(), SimError> {
        let mut budget = self.cfg.event_budget;
        while self.queue.peek().is_some_and(|s| s.time <= t) {
            if budget == 0 {
                return Err(SimError::EventBudgetExceeded(self.cfg.event_budget));
            }
            budget -= 1;
            self.step();
        }
        self.now = self.now.max(t);
        Ok(())
    }

    pub fn run_for(&mut self, duration: u64) -> Result<(), SimError> {
        self.run_until(self.now + duration)
    }

    /// Drive the simulation until operation `op` completes.
    pub fn run_until_done(&mut self, op: OpId) -> Result<OpOutcome, SimError> {
        let mut budget = self.cfg.event_budget;
        loop {
            if let Some(o) = self.outcomes.remove(&op) {
                return Ok(o);
            }
            if budget == 0 || !self.step() {
                return Err(SimError::EventBudgetExceeded(self.cfg.event_budget));
            }
            budget -= 1;
        }
    }

    pub fn take_outcome(&mut self, op: OpId) -> Option<OpOutcome> {
        self.outcomes.remove(&op)
    }

    pub fn is_done(&self, op: OpId) -> bool {
        !self.ops.contains_key(&op)
    }

    // --- messaging -------------------------------------------------------

    fn transmit(&mut self, from: usize, to: Contact, rpc_id: u64, body: Body) {
        let msg = Message { rpc_id, sender: self.peers[from].dht.contact, body };
        let bytes = msg.encode();
        if msg.body.is_request() {
            self.stats.requests_sent += 1;
        } else {
            self.stats.responses_sent += 1;
        }
        if self.cfg.drop_rate > 0.0 && self.rng.gen_bool(self.cfg.drop_rate.min(1.0)) {
            self.stats.messages_dropped += 1;
            self.record(to.addr.0, format!("drop:{}", msg.body.name()), &bytes);
            return;
        }
        let delay = self.cfg.latency.sample(&mut self.rng);
        self.schedule(self.now + delay, Event::Deliver { to: to.addr, bytes });
    }

    fn request(&mut self, from: usize, to: Contact, body: Body, purpose: Purpose) {
        let rpc = self.next_rpc;
        self.next_rpc += 1;
        self.rpcs.insert(rpc, PendingRpc { origin: from, to, purpose });
        self.transmit(from, to, rpc, body);
        self.schedule(self.now + self.cfg.rpc_timeout, Event::RpcTimeout { rpc });
    }

    fn observe(&mut self, peer: usize, c: Contact) {
        if let Observed::BucketFull { least_recent } = self.peers[peer].dht.routing.observe(c) {
            if self.evictions.insert((peer, least_recent.id)) {
                self.request(peer, least_recent, Body::Ping, Purpose::Eviction { stale: least_recent.id, newcomer: c });
            }
        }
    }

    fn on_deliver(&mut self, to: PeerAddr, bytes: &[u8]) {
        let peer = to.0 as usize;
        let msg = match Message::decode(bytes) {
            Ok(m) => m,
            Err(_) => {
                self.record(to.0, "malformed", bytes);
                return;
            }
        };
        self.record(to.0, format!("deliver:{}", msg.body.name()), bytes);
        self.observe(peer, msg.sender);
        if msg.body.is_request() {
            if let Some(reply) = self.peers[peer].dht.answer(msg.body) {
                self.transmit(peer, msg.sender, msg.rpc_id, reply);
            }
            return;
        }
        let Some(pending) = self.rpcs.remove(&msg.rpc_id) else {
            return; // late reply to a request that already timed out
        };
        if pending.origin != peer || pending.to.id != msg.sender.id {
            self.rpcs.insert(msg.rpc_id, pending);
            return;
        }
        self.inert += 1;
        self.on_reply(pending, Some(msg.body));
    }

    fn on_timeout(&mut self, rpc: u64) {
        if let Some(pending) = self.rpcs.remove(&rpc) {
            self.stats.timeouts += 1;
            self.record(pending.origin as u32, "timeout", &rpc.to_be_bytes());
            self.on_reply(pending, None);
        }
    }

    fn on_reply(&mut self, pending: PendingRpc, body: Option<Body>) {
        match pending.purpose {
            Purpose::Eviction { stale, newcomer } => {
                self.evictions.remove(&(pending.origin, stale));
                if body.is_none() {
                    self.peers[pending.origin].dht.routing.replace(&stale, newcomer);
                }
            }
            Purpose::Replicate { op } => {
                if let Some(Op { kind: OpKind::Store { phase: StorePhase::Replicating { pending: n, replicas }, .. }, .. }) =
                    self.ops.get_mut(&op)
                {
                    *n -= 1;
                    if matches!(body, Some(Body::StoreAck)) {
                        replicas.push(pending.to.id);
                    }
                }
                self.advance(op);
            }
            Purpose::Lookup { op, branch } => {
                let Some(o) = self.ops.get_mut(&op) else { return };
                let from = pending.to.id;
                let lookup = match &mut o.kind {
                    OpKind::Join(l) => Some(l),
                    OpKind::Store { phase: StorePhase::Locating(l), .. } => Some(l),
                    OpKind::Find { branches, .. } => branches.get_mut(branch),
                    _ => None,
                };
                let Some(lookup) = lookup else { return };
                match body {
                    Some(Body::Nodes(closer)) => lookup.on_response(&from, closer),
                    Some(Body::Tuples { closer, tuples }) => {
                        lookup.on_response(&from, closer);
                        if let OpKind::Find { found, .. } = &mut o.kind {
                            for t in tuples {
                                found.insert(wire::encode(&t), t);
                            }
                        }
                    }
                    _ => lookup.on_failure(&from),
                }
                self.advance(op);
            }
        }
    }

    // --- operations ------------------------------------------------------

    fn new_op(&mut self, origin: usize, owner: OpOwner, kind: OpKind) -> OpId {
        let id = self.next_op;
        self.next_op += 1;
        self.ops.insert(id, Op { origin, owner, kind });
        id
    }

    fn seeded_lookup(&self, origin: usize, target: NodeId) -> IterativeLookup {
        let dht = &self.peers[origin].dht;
        IterativeLookup::new(target, self.cfg.k, self.cfg.alpha, dht.contact, dht.routing.closest(&target, self.cfg.k))
    }

    fn not_joined(&self, origin: usize) -> bool {
        self.peers.len() > 1 && self.peers[origin].dht.routing.is_empty()
    }

    fn start_join(&mut self, origin: usize) -> OpId {
        let lookup = self.seeded_lookup(origin, self.peers[origin].dht.contact.id);
        let op = self.new_op(origin, OpOwner::Caller, OpKind::Join(lookup));
        self.advance(op);
        op
    }

    /// Begin storing `t` on the peers closest to its address.
    pub fn start_store(&mut self, origin: usize, t: Tuple) -> OpId {
        let address = tuple_address(&t);
        if self.not_joined(origin) {
            let op = self.new_op(origin, OpOwner::Caller, OpKind::Join(self.seeded_lookup(origin, NodeId::from(address))));
            self.finish(op, OpOutcome::Stored(Err(DhtError::NoPeers)));
            return op;
        }
        let lookup = self.seeded_lookup(origin, NodeId::from(address));
        let op = self.new_op(
            origin,
            OpOwner::Caller,
            OpKind::Store { tuple: t, address, phase: StorePhase::Locating(lookup) },
        );
        self.advance(op);
        op
    }

    /// Begin a wildcard lookup; an exact lookup is the zero-`*` case.
    pub(crate) fn start_find(
        &mut self,
        origin: usize,
        pattern: LookupPattern,
        params: EffectiveWidthParams,
        owner: OpOwner,
    ) -> Result<OpId, DhtError> {
        let targets = self.branch_targets(&pattern, params)?;
        if self.not_joined(origin) {
            return Err(DhtError::NoPeers);
        }
        let branches = targets.into_iter().map(|a| self.seeded_lookup(origin, NodeId::from(a))).collect();
        let found: BTreeMap<Vec<u8>, Tuple> =
            self.peers[origin].dht.store.scan(&pattern).into_iter().map(|t| (wire::encode(t), t.clone())).collect();
        let op = self.new_op(origin, owner, OpKind::Find { pattern, branches, found });
        self.advance(op);
        Ok(op)
    }

    /// Routing targets of a lookup: every concretization of the `*` trits in
    /// the first `B` positions, later `*` routed as 0.
    pub fn branch_targets(
        &self,
        pattern: &LookupPattern,
        params: EffectiveWidthParams,
    ) -> Result<Vec<InterleavedAddress>, DhtError> {
        let w = pattern.wildcards_in_prefix(params.width());
        let branches: u128 = if w >= 127 { u128::MAX } else { 1u128 << w };
        if branches > self.cfg.branch_cap as u128 {
            return Err(DhtError::BranchBudgetExceeded { branches, cap: self.cfg.branch_cap });
        }
        Ok(pattern.concretize_prefix(params.width()))
    }

    fn advance(&mut self, op_id: OpId) {
        let Some(op) = self.ops.get_mut(&op_id) else { return };
        let origin = op.origin;
        let mut sends: Vec<(Contact, Body, Purpose)> = Vec::new();
        let mut outcome = None;
        let mut store_locally = None;
        match &mut op.kind {
            OpKind::Join(l) => {
                let target = l.target();
                for c in l.next_queries() {
                    sends.push((c, Body::FindNode(target), Purpose::Lookup { op: op_id, branch: 0 }));
                }
                if l.is_done() {
                    outcome = Some(OpOutcome::Joined(if l.unreachable() { Err(DhtError::NetworkUnreachable) } else { Ok(()) }));
                }
            }
            OpKind::Store { tuple, address, phase } => {
                if let StorePhase::Locating(l) = phase {
                    let target = l.target();
                    for c in l.next_queries() {
                        sends.push((c, Body::FindNode(target), Purpose::Lookup { op: op_id, branch: 0 }));
                    }
                    if l.is_done() {
                        if l.unreachable() {
                            outcome = Some(OpOutcome::Stored(Err(DhtError::NetworkUnreachable)));
                        } else {
                            let own = self.peers[origin].dht.contact.id;
                            let mut replicas = Vec::new();
                            let mut pending = 0;
                            for c in l.closest_answered() {
                                if c.id == own {
                                    store_locally = Some(tuple.clone());
                                    replicas.push(own);
                                } else {
                                    pending += 1;
                                    sends.push((c, Body::Store(tuple.clone()), Purpose::Replicate { op: op_id }));
                                }
                            }
                            *phase = StorePhase::Replicating { pending, replicas };
                        }
                    }
                }
                if let StorePhase::Replicating { pending: 0, replicas } = phase {
                    if outcome.is_none() {
                        outcome = Some(OpOutcome::Stored(if replicas.is_empty() {
                            Err(DhtError::NetworkUnreachable)
                        } else {
                            Ok(StoreReceipt { address: *address, replicas: std::mem::take(replicas) })
                        }));
                    }
                }
            }
            OpKind::Find { pattern, branches, found } => {
                for (b, l) in branches.iter_mut().enumerate() {
                    let target = l.target();
                    for c in l.next_queries() {
                        sends.push((
                            c,
                            Body::FindTuples { target, pattern: *pattern },
                            Purpose::Lookup { op: op_id, branch: b },
                        ));
                    }
                }
                if branches.iter().all(IterativeLookup::is_done) {
                    outcome = Some(OpOutcome::Found(if branches.iter().all(IterativeLookup::unreachable) {
                        Err(DhtError::NetworkUnreachable)
                    } else {
                        Ok(FoundTuples {
                            tuples: std::mem::take(found).into_values().collect(),
                            branches: branches.len(),
                        })
                    }));
                }
            }
        }
        if let Some(t) = store_locally {
            self.peers[origin].dht.store_local(t);
        }
        for (to, body, purpose) in sends {
            self.request(origin, to, body, purpose);
        }
        if let Some(o) = outcome {
            self.finish(op_id, o);
        }
    }

    fn finish(&mut self, op_id: OpId, outcome: OpOutcome) {
        let Some(op) = self.ops.remove(&op_id) else { return };
        match (op.owner, outcome) {
            (OpOwner::Session { peer, session, template }, OpOutcome::Found(res)) => {
                let cap = self.cfg.queue_cap;
                self.peers[peer].node.on_found(session, template, res, cap);
            }
            (_, outcome) => {
                self.outcomes.insert(op_id, outcome);
            }
        }
    }

    fn on_tick(&mut self, peer: usize, session: SessionId) {
        let Some((period, lookups)) = self.peers[peer].node.poll_plan(session) else {
            return; // closed: stop re-polling
        };
        let params = self.cfg.width_params();
        for (template, pattern) in lookups {
            if let Err(e) = self.start_find(peer, pattern, params, OpOwner::Session { peer, session, template }) {
                self.peers[peer].node.on_found(session, template, Err(e), self.cfg.queue_cap);
            }
        }
        self.schedule(self.now + period, Event::SessionTick { peer, session });
    }

    // --- blocking conveniences ----------------------------------------------

    pub fn store(&mut self, origin: usize, t: Tuple) -> Result<StoreReceipt, SimError> {
        let op = self.start_store(origin, t);
        match self.run_until_done(op)? {
            OpOutcome::Stored(r) => Ok(r?),
            other => unreachable!("store produced {other:?}"),
        }
    }

    pub fn lookup_wildcard_with(
        &mut self,
        origin: usize,
        pattern: &LookupPattern,
        params: EffectiveWidthParams,
    ) -> Result<FoundTuples, SimError> {
        let op = self.start_find(origin, *pattern, params, OpOwner::Caller)?;
        match self.run_until_done(op)? {
            OpOutcome::Found(r) => Ok(r?),
            other => unreachable!("lookup produced {other:?}"),
        }
    }

    pub fn lookup_wildcard(&mut self, origin: usize, pattern: &LookupPattern) -> Result<FoundTuples, SimError> {
        self.lookup_wildcard_with(origin, pattern, self.cfg.width_params())
    }

    pub fn lookup_exact(&mut self, origin: usize, addr: &InterleavedAddress) -> Result<Vec<Tuple>, SimError> {
        Ok(self.lookup_wildcard(origin, &LookupPattern::exact(addr))?.tuples)
    }

    // --- oracles -------------------------------------------------------

    /// Union over every peer's store of the tuples matching `f`, by linear
    /// scan.
    pub fn global_oracle_scan(&self, f: &FilterTemplate) -> BTreeSet<Tuple> {
        self.peers.iter().flat_map(|p| p.dht.store.iter()).filter(|t| matches(f, t)).cloned().collect()
    }

    /// Peers whose store holds `t`.
    pub fn holders(&self, t: &Tuple) -> Vec<NodeId> {
        let a = tuple_address(t);
        self.peers
            .iter()
            .filter(|p| p.dht.store.get(&a).iter().any(|x| *x == t))
            .map(|p| p.dht.contact.id)
            .collect()
    }

    /// The `n` ids globally closest to `addr`, from full knowledge.
    pub fn true_closest(&self, addr: &InterleavedAddress, n: usize) -> Vec<NodeId> {
        let target = NodeId::from(*addr);
        let mut ids: Vec<NodeId> = self.peers.iter().map(|p| p.dht.contact.id).collect();
        ids.sort_by_key(|id| id.distance(&target));
        ids.truncate(n);
        ids
    }

    pub fn audit_routing(&self) -> Result<(), String> {
        for (i, p) in self.peers.iter().enumerate() {
            p.dht.routing.audit().map_err(|e| format!("peer {i}: {e}"))?;
        }
        Ok(())
    }
}
