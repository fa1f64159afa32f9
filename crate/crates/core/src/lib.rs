// SPDX-License-Identifier: Apache-2.0

//! An information-centric network at desk scale.
//!
//! The graph is a set of insert-only, time-stamped, optionally signed
//! tuples. Producers [publish](node::NodeApi::publish) tuples; consumers hold
//! standing subscriptions, either tuple-level [filter templates](filter) or
//! graph queries evaluated incrementally by a [RETE network](rete). Tuples
//! live in a Kademlia-style [DHT](dht) whose 512-bit keys interleave the bits
//! of a tuple's four labels, so that a template with wildcard components
//! becomes a lookup with "don't care" bits. Everything runs inside a
//! deterministic discrete-event [simulator](sim).

pub mod dht;
pub mod filter;
pub mod label;
pub mod names;
pub mod node;
pub mod rete;
pub mod scenario;
pub mod signing;
pub mod sim;
pub mod syntax;
pub mod text;
pub mod tuple;
pub mod value;
pub mod wire;

pub use filter::{matches, selectivity_rank, FilterTemplate, Slot};
pub use label::{new_label, Label};
pub use names::NameDirectory;
pub use signing::{sign_tuple, verify_tuple, KeyPair, KeyRegistry, Verdict};
pub use tuple::{make_tuple, NodeRef, Tuple};
pub use value::{Value, ValueType};
