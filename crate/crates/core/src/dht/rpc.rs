// SPDX-License-Identifier: Apache-2.0

//! Peer wire messages.
//!
//! Every message starts with a common header:
//!
//! ```text
//! version u8 (0x01) | kind u8 | rpc id u64 | sender id 64 B | sender addr u32
//! ```
//!
//! followed by a kind-specific body (integers big-endian):
//!
//! | kind | name               | body                                                          |
//! |------|--------------------|---------------------------------------------------------------|
//! | 0x01 | PING               | (empty)                                                       |
//! | 0x02 | STORE              | packet length u32, tuple packet                               |
//! | 0x03 | FIND_NODE          | target id 64 B                                                |
//! | 0x04 | FIND_TUPLES        | routing target 64 B, pattern 128 B (2 bits per trit)          |
//! | 0x81 | PONG               | (empty)                                                       |
//! | 0x82 | STORE_ACK          | (empty)                                                       |
//! | 0x83 | NODES              | count u16, count × (id 64 B, addr u32)                        |
//! | 0x84 | TUPLES             | contact count u16, contacts, tuple count u32, (len u32, packet)* |
//!
//! Pattern trits are packed MSB first as 00 = 0, 01 = 1, 10 = `*`.

use crate::dht::address::LookupPattern;
use crate::dht::routing::{Contact, NodeId, PeerAddr};
use crate::tuple::Tuple;
use crate::wire;

pub const RPC_VERSION: u8 = 0x01;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Body {
    Ping,
    Store(Tuple),
    FindNode(NodeId),
    FindTuples { target: NodeId, pattern: LookupPattern },
    Pong,
    StoreAck,
    Nodes(Vec<Contact>),
    Tuples { closer: Vec<Contact>, tuples: Vec<Tuple> },
}

impl Body {
    pub fn kind(&self) -> u8 {
        match self {
            Body::Ping => 0x01,
            Body::Store(_) => 0x02,
            Body::FindNode(_) => 0x03,
            Body::FindTuples { .. } => 0x04,
            Body::Pong => 0x81,
            Body::StoreAck => 0x82,
            Body::Nodes(_) => 0x83,
            Body::Tuples { .. } => 0x84,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Body::Ping => "PING",
            Body::Store(_) => "STORE",
            Body::FindNode(_) => "FIND_NODE",
            Body::FindTuples { .. } => "FIND_TUPLES",
            Body::Pong => "PONG",
            Body::StoreAck => "STORE_ACK",
            Body::Nodes(_) => "NODES",
            Body::Tuples { .. } => "TUPLES",
        }
    }

    pub fn is_request(&self) -> bool {
        self.kind() & 0x80 == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub rpc_id: u64,
    pub sender: Contact,
    pub body: Body,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RpcDecodeError {
    #[error("message truncated")]
    Truncated,
    #[error("unsupported rpc version {0:#04x}")]
    BadVersion(u8),
    #[error("unknown message kind {0:#04x}")]
    UnknownKind(u8),
    #[error("invalid lookup pattern encoding")]
    BadPattern,
    #[error("embedded tuple packet: {0}")]
    Packet(#[from] wire::DecodeError),
    #[error("{0} trailing bytes")]
    Trailing(usize),
}

fn put_contact(out: &mut Vec<u8>, c: &Contact) {
    out.extend_from_slice(&c.id.0);
    out.extend_from_slice(&c.addr.0.to_be_bytes());
}

fn put_contacts(out: &mut Vec<u8>, cs: &[Contact]) {
    out.extend_from_slice(&(cs.len() as u16).to_be_bytes());
    for c in cs {
        put_contact(out, c);
    }
}

impl Message {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(96);
        out.push(RPC_VERSION);
        out.push(self.body.kind());
        out.extend_from_slice(&self.rpc_id.to_be_bytes());
        put_contact(&mut out, &self.sender);
        match &self.body {
            Body::Ping | Body::Pong | Body::StoreAck => {}
            Body::Store(t) => {
                let p = wire::encode(t);
                out.extend_from_slice(&(p.len() as u32).to_be_bytes());
                out.extend_from_slice(&p);
            }
            Body::FindNode(id) => out.extend_from_slice(&id.0),
            Body::FindTuples { target, pattern } => {
                out.extend_from_slice(&target.0);
                out.extend_from_slice(&pattern.to_wire());
            }
            Body::Nodes(cs) => put_contacts(&mut out, cs),
            Body::Tuples { closer, tuples } => {
                put_contacts(&mut out, closer);
                out.extend_from_slice(&(tuples.len() as u32).to_be_bytes());
                for t in tuples {
                    let p = wire::encode(t);
                    out.extend_from_slice(&(p.len() as u32).to_be_bytes());
                    out.extend_from_slice(&p);
                }
            }
        }
        out
    }

    pub fn decode(b: &[u8]) -> Result<Message, RpcDecodeError> {
        let mut r = Reader { b, pos: 0 };
        let version = r.u8()?;
        if version != RPC_VERSION {
            return Err(RpcDecodeError::BadVersion(version));
        }
        let kind = r.u8()?;
        let rpc_id = u64::from_be_bytes(r.take(8)?.try_into().unwrap());
        let sender = r.contact()?;
        let body = match kind {
            0x01 => Body::Ping,
            0x81 => Body::Pong,
            0x82 => Body::StoreAck,
            0x02 => Body::Store(r.packet()?),
            0x03 => Body::FindNode(r.id()?),
            0x04 => {
                let target = r.id()?;
                let pattern: &[u8; 128] = r.take(128)?.try_into().unwrap();
                Body::FindTuples { target, pattern: LookupPattern::from_wire(pattern).ok_or(RpcDecodeError::BadPattern)? }
            }
            0x83 => Body::Nodes(r.contacts()?),
            0x84 => {
                let closer = r.contacts()?;
                let n = r.u32()? as usize;
                let mut tuples = Vec::with_capacity(n.min(4096));
                for _ in 0..n {
                    tuples.push(r.packet()?);
                }
                Body::Tuples { closer, tuples }
            }
            other => return Err(RpcDecodeError::UnknownKind(other)),
        };
        if r.pos != b.len() {
            return Err(RpcDecodeError::Trailing(b.len() - r.pos));
        }
        Ok(Message { rpc_id, sender, body })
    }
}

struct Reader<'a> {
    b: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], RpcDecodeError> {
        let end = self.pos.checked_add(n).ok_or(RpcDecodeError::Truncated)?;
        let s = self.b.get(self.pos..end).ok_or(RpcDecodeError::Truncated)?;
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, RpcDecodeError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, RpcDecodeError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn id(&mut self) -> Result<NodeId, RpcDecodeError> {
        Ok(NodeId(self.take(64)?.try_into().unwrap()))
    }

    fn contact(&mut self) -> Result<Contact, RpcDecodeError> {
        let id = self.id()?;
        Ok(Contact { id, addr: PeerAddr(self.u32()?) })
    }

    fn contacts(&mut self) -> Result<Vec<Contact>, RpcDecodeError> {
        let n = u16::from_be_bytes(self.take(2)?.try_into().unwrap());
        (0..n).map(|_| self.contact()).collect()
    }

    fn packet(&mut self) -> Result<Tuple, RpcDecodeError> {
        let n = self.u32()? as usize;
        Ok(wire::decode(self.take(n)?)?)
    }
}
