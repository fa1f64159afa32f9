// SPDX-License-Identifier: Apache-2.0

//! Graph subscriptions evaluated incrementally with RETE.
//!
//! A query such as
//!
//! ```text
//! SUBSCRIBE ?s
//! WHERE
//!   ?p isIn ?r.
//!   ?r name 'Lab A'.
//!   ?p likesSong ?s
//! ```
//!
//! compiles into one alpha memory per pattern, each backed by a tuple-level
//! filter template, and a chain of join vertices. Feeding tuples in any order
//! yields each projected result exactly once, as soon as it is complete.

mod network;
mod query;

pub use network::{
    compile, derive_alpha_templates, extract_binding, reorder_patterns, AlphaMemory, BetaMemory, Binding,
    JoinVertex, ReteNetwork,
};
pub use query::{parse_query, Query, QueryError, Term, TriplePattern};
