// SPDX-License-Identifier: Apache-2.0

use crate::dht::address::tuple_address;
use crate::dht::routing::{Contact, RoutingTable};
use crate::dht::rpc::Body;
use crate::dht::trie::TrieStore;
use crate::tuple::Tuple;

/// The DHT-side state of one peer: its identity, routing table and store.
#[derive(Debug, Clone)]
pub struct DhtPeer {
    pub contact: Contact,
    pub routing: RoutingTable,
    pub store: TrieStore,
}

impl DhtPeer {
    pub fn new(contact: Contact, k: usize) -> Self {
        DhtPeer { contact, routing: RoutingTable::new(contact.id, k), store: TrieStore::new() }
    }

    pub fn store_local(&mut self, t: Tuple) -> bool {
        self.store.insert(tuple_address(&t), t)
    }

    /// Answer a request body. Returns `None` for bodies that are not
    /// requests.
    pub fn answer(&mut self, body: Body) -> Option<Body> {
        let k = self.routing.k();
        Some(match body {
            Body::Ping => Body::Pong,
            Body::Store(t) => {
                self.store_local(t);
                Body::StoreAck
            }
            Body::FindNode(target) => Body::Nodes(self.routing.closest(&target, k)),
            Body::FindTuples { target, pattern } => Body::Tuples {
                closer: self.routing.closest(&target, k),
                tuples: self.store.scan(&pattern).into_iter().cloned().collect(),
            },
            Body::Pong | Body::StoreAck | Body::Nodes(_) | Body::Tuples { .. } => return None,
        })
    }
}
