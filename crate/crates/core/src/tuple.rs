// SPDX-License-Identifier: Apache-2.0

//! The tuple: one signed, time-stamped edge of the information graph.

use std::fmt;

use crate::label::Label;
use crate::value::Value;

/// Either endpoint of an edge: a labeled vertex or a value node.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum NodeRef {
    Vertex(Label),
    Value(Value),
}

impl NodeRef {
    pub fn as_label(&self) -> Option<Label> {
        match self {
            NodeRef::Vertex(l) => Some(*l),
            NodeRef::Value(_) => None,
        }
    }

    pub fn as_value(&self) -> Option<&Value> {
        match self {
            NodeRef::Vertex(_) => None,
            NodeRef::Value(v) => Some(v),
        }
    }
}

impl From<Label> for NodeRef {
    fn from(l: Label) -> Self {
        NodeRef::Vertex(l)
    }
}

impl From<Value> for NodeRef {
    fn from(v: Value) -> Self {
        NodeRef::Value(v)
    }
}

/// Which slot of a tuple an error refers to.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Position {
    Subject,
    Predicate,
    Object,
    Context,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Position::Subject => "subject",
            Position::Predicate => "predicate",
            Position::Object => "object",
            Position::Context => "context",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TupleError {
    #[error("malformed tuple: a value node cannot appear in the {0} position")]
    ValueOutOfPlace(Position),
    #[error("malformed tuple: tuple is already signed")]
    AlreadySigned,
}

pub type Signature = [u8; 64];

/// One edge statement. Fields are private so that every instance satisfies
/// the placement rules: only the object may be a value, and a signature is
/// present iff a signer is.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tuple {
    subject: Label,
    predicate: Label,
    object: NodeRef,
    context: Label,
    timestamp: u64,
    provenance: Option<(Label, Signature)>,
}

/// Build an unsigned tuple, rejecting values outside the object position.
pub fn make_tuple(
    subject: impl Into<NodeRef>,
    predicate: impl Into<NodeRef>,
    object: impl Into<NodeRef>,
    context: impl Into<NodeRef>,
    timestamp: u64,
) -> Result<Tuple, TupleError> {
    let vertex = |n: NodeRef, pos| n.as_label().ok_or(TupleError::ValueOutOfPlace(pos));
    Ok(Tuple {
        subject: vertex(subject.into(), Position::Subject)?,
        predicate: vertex(predicate.into(), Position::Predicate)?,
        object: object.into(),
        context: vertex(context.into(), Position::Context)?,
        timestamp,
        provenance: None,
    })
}

impl Tuple {
    /// Infallible constructor for the common all-label-subject case.
    pub fn new(
        subject: Label,
        predicate: Label,
        object: impl Into<NodeRef>,
        context: Label,
        timestamp: u64,
    ) -> Self {
        Tuple { subject, predicate, object: object.into(), context, timestamp, provenance: None }
    }

    pub fn subject(&self) -> Label {
        self.subject
    }

    pub fn predicate(&self) -> Label {
        self.predicate
    }

    pub fn object(&self) -> &NodeRef {
        &self.object
    }

    pub fn context(&self) -> Label {
        self.context
    }

    /// Creator-assigned microseconds since the Unix epoch.
    pub fn timestamp(&self) -> u64 {
        self.timestamp
    }

    pub fn signer(&self) -> Option<Label> {
        self.provenance.map(|(l, _)| l)
    }

    pub fn signature(&self) -> Option<&Signature> {
        self.provenance.as_ref().map(|(_, s)| s)
    }

    pub fn is_signed(&self) -> bool {
        self.provenance.is_some()
    }

    pub fn with_timestamp(mut self, timestamp: u64) -> Self {
        self.timestamp = timestamp;
        self
    }

    /// The same statement with signer and signature removed.
    pub fn unsigned(&self) -> Tuple {
        Tuple { provenance: None, ..self.clone() }
    }

    pub(crate) fn with_provenance(mut self, signer: Label, signature: Signature) -> Self {
        self.provenance = Some((signer, signature));
        self
    }
}

impl fmt::Debug for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {} ", self.subject, self.predicate)?;
        match &self.object {
            NodeRef::Vertex(l) => write!(f, "{l}")?,
            NodeRef::Value(v) => write!(f, "{v:?}")?,
        }
        write!(f, " {} @{}", self.context, self.timestamp)?;
        if let Some(s) = self.signer() {
            write!(f, " signed-by {s}")?;
        }
        f.write_str(")")
    }
}
