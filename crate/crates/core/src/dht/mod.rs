// SPDX-License-Identifier: Apache-2.0

//! Kademlia over 512-bit interleaved tuple addresses.
//!
//! A tuple is stored on the `K` peers whose ids are XOR-closest to its
//! [`tuple_address`]. A filter template maps to a [`LookupPattern`] of
//! 0/1/`*` trits; a wildcard lookup branches on every `*` within the first
//! `B = ceil(log2 N) + k_slack` positions, routes each branch like an exact
//! lookup, and lets each contacted peer scan its own [`TrieStore`] with the
//! full pattern.
//!
//! The network-facing operations (store, exact and wildcard lookups) are
//! driven by the [simulator](crate::sim); this module holds the per-peer
//! state and the pieces that do not depend on a transport.

pub mod address;
pub mod balance;
pub mod lookup;
pub mod peer;
pub mod routing;
pub mod rpc;
pub mod trie;

pub use address::{
    deinterleave, interleave, pattern_address, tuple_address, value_digest, EffectiveWidthParams,
    InterleavedAddress, LookupPattern, Trit,
};
pub use balance::{address_balance_report, BalanceReport};
pub use lookup::IterativeLookup;
pub use peer::DhtPeer;
pub use routing::{Contact, Distance, NodeId, PeerAddr, RoutingTable};
pub use trie::{trie_scan, TrieStore};

pub const DEFAULT_K: usize = 20;
pub const DEFAULT_ALPHA: usize = 3;
pub const DEFAULT_BRANCH_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DhtError {
    #[error("network unreachable: no remote peer answered")]
    NetworkUnreachable,
    #[error("peer has not joined: its routing table is empty")]
    NoPeers,
    #[error("wildcard lookup needs {branches} branches, above the cap of {cap}")]
    BranchBudgetExceeded { branches: u128, cap: usize },
    #[error("no peer at index {0}")]
    UnknownPeer(usize),
}
