// SPDX-License-Identifier: Apache-2.0

//! Tuple-level filter templates, the network's subscription primitive.
//!
//! A template has one slot per addressable tuple component. Each slot is a
//! wildcard, an exact label, or (object slot only) an exact value.
//! Timestamps and signers are not filterable here.

use std::fmt;

use crate::label::Label;
use crate::names::NameDirectory;
use crate::syntax::{tokenize, SyntaxError, Token};
use crate::tuple::{NodeRef, Position, Tuple};
use crate::value::Value;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Slot {
    Wildcard,
    Label(Label),
    Value(Value),
}

impl Slot {
    pub fn is_wildcard(&self) -> bool {
        matches!(self, Slot::Wildcard)
    }

    fn accepts_label(&self, l: Label) -> bool {
        match self {
            Slot::Wildcard => true,
            Slot::Label(x) => *x == l,
            Slot::Value(_) => false,
        }
    }

    fn accepts_node(&self, n: &NodeRef) -> bool {
        match (self, n) {
            (Slot::Wildcard, _) => true,
            (Slot::Label(x), NodeRef::Vertex(l)) => x == l,
            (Slot::Value(x), NodeRef::Value(v)) => x == v,
            _ => false,
        }
    }
}

impl From<Label> for Slot {
    fn from(l: Label) -> Self {
        Slot::Label(l)
    }
}

impl From<Value> for Slot {
    fn from(v: Value) -> Self {
        Slot::Value(v)
    }
}

impl From<NodeRef> for Slot {
    fn from(n: NodeRef) -> Self {
        match n {
            NodeRef::Vertex(l) => Slot::Label(l),
            NodeRef::Value(v) => Slot::Value(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("a value can only be matched in the object slot, not the {0} slot")]
    ValueOutOfPlace(Position),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("unknown name {name:?} at offset {pos}")]
    UnknownName { name: String, pos: usize },
}

/// A 4-slot pattern over (subject, predicate, object, context).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FilterTemplate {
    slots: [Slot; 4],
}

impl FilterTemplate {
    pub fn new(
        subject: impl Into<Slot>,
        predicate: impl Into<Slot>,
        object: impl Into<Slot>,
        context: impl Into<Slot>,
    ) -> Result<Self, TemplateError> {
        let slots = [subject.into(), predicate.into(), object.into(), context.into()];
        for (i, pos) in [(0, Position::Subject), (1, Position::Predicate), (3, Position::Context)] {
            if matches!(slots[i], Slot::Value(_)) {
                return Err(TemplateError::ValueOutOfPlace(pos));
            }
        }
        Ok(FilterTemplate { slots })
    }

    /// The all-wildcard template.
    pub fn any() -> Self {
        FilterTemplate { slots: [Slot::Wildcard, Slot::Wildcard, Slot::Wildcard, Slot::Wildcard] }
    }

    /// The fully ground template built from a tuple's own components.
    pub fn ground(t: &Tuple) -> Self {
        FilterTemplate {
            slots: [
                Slot::Label(t.subject()),
                Slot::Label(t.predicate()),
                t.object().clone().into(),
                Slot::Label(t.context()),
            ],
        }
    }

    pub fn slots(&self) -> &[Slot; 4] {
        &self.slots
    }

    pub fn subject(&self) -> &Slot {
        &self.slots[0]
    }

    pub fn predicate(&self) -> &Slot {
        &self.slots[1]
    }

    pub fn object(&self) -> &Slot {
        &self.slots[2]
    }

    pub fn context(&self) -> &Slot {
        &self.slots[3]
    }

    /// Replace slot `i` by a wildcard.
    pub fn relax(&self, i: usize) -> Self {
        let mut f = self.clone();
        f.slots[i] = Slot::Wildcard;
        f
    }

    pub fn wildcard_components(&self) -> usize {
        self.slots.iter().filter(|s| s.is_wildcard()).count()
    }

    pub fn parse(src: &str, names: &NameDirectory) -> Result<Self, TemplateError> {
        parse_template(src, names)
    }
}

impl fmt::Debug for FilterTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, s) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match s {
                Slot::Wildcard => f.write_str("*")?,
                Slot::Label(l) => write!(f, "{l}")?,
                Slot::Value(v) => write!(f, "{v:?}")?,
            }
        }
        f.write_str("]")
    }
}

pub fn matches(f: &FilterTemplate, t: &Tuple) -> bool {
    f.slots[0].accepts_label(t.subject())
        && f.slots[1].accepts_label(t.predicate())
        && f.slots[2].accepts_node(t.object())
        && f.slots[3].accepts_label(t.context())
}

/// Number of non-wildcard slots; higher is more selective.
pub fn selectivity_rank(f: &FilterTemplate) -> usize {
    4 - f.wildcard_components()
}

/// Parse `[s, p, o, c]` where each element is `*`, a UUID, a name from
/// `names`, or (object only) a quoted string.
pub fn parse_template(src: &str, names: &NameDirectory) -> Result<FilterTemplate, TemplateError> {
    let toks = tokenize(src)?;
    let end = src.len();
    let mut it = toks.into_iter().peekable();
    let expect = |want: Token, it: &mut std::iter::Peekable<std::vec::IntoIter<(usize, Token)>>| {
        match it.next() {
            Some((_, t)) if t == want => Ok(()),
            Some((p, t)) => Err(SyntaxError::new(p, format!("expected {want}, found {t}"))),
            None => Err(SyntaxError::new(end, format!("expected {want}, found end of input"))),
        }
    };
    expect(Token::LBracket, &mut it)?;
    let mut slots = Vec::with_capacity(4);
    for i in 0..4 {
        if i > 0 {
            expect(Token::Comma, &mut it)?;
        }
        let slot = match it.next() {
            Some((_, Token::Star)) => Slot::Wildcard,
            Some((_, Token::Quoted(s))) => Slot::Value(Value::utf8(s)),
            Some((pos, Token::Word(w))) => Slot::Label(
                names.resolve_term(&w).ok_or(TemplateError::UnknownName { name: w, pos })?,
            ),
            Some((p, t)) => return Err(SyntaxError::new(p, format!("expected a slot, found {t}")).into()),
            None => return Err(SyntaxError::new(end, "expected a slot, found end of input").into()),
        };
        slots.push(slot);
    }
    expect(Token::RBracket, &mut it)?;
    if let Some((p, t)) = it.next() {
        return Err(SyntaxError::new(p, format!("unexpected {t} after template")).into());
    }
    let [s, p, o, c]: [Slot; 4] = slots.try_into().expect("four slots");
    FilterTemplate::new(s, p, o, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(n: u128) -> Label {
        Label::from_u128(n)
    }

    const ALICE: u128 = 1;
    const IS_IN: u128 = 2;
    const LAB_A: u128 = 3;
    const CTX: u128 = 4;
    const LIKES: u128 = 5;
    const SONG_A: u128 = 6;
    const NAME: u128 = 7;

    #[test]
    fn predicate_template_matches() {
        let f = FilterTemplate::new(Slot::Wildcard, l(IS_IN), Slot::Wildcard, Slot::Wildcard).unwrap();
        assert!(matches(&f, &Tuple::new(l(ALICE), l(IS_IN), l(LAB_A), l(CTX), 0)));
        assert!(!matches(&f, &Tuple::new(l(ALICE), l(LIKES), l(SONG_A), l(CTX), 0)));
    }

    #[test]
    fn value_template_matches() {
        let f = FilterTemplate::new(Slot::Wildcard, l(NAME), Value::utf8("Lab A"), Slot::Wildcard).unwrap();
        assert!(matches(&f, &Tuple::new(l(LAB_A), l(NAME), Value::utf8("Lab A"), l(CTX), 0)));
        assert!(!matches(&f, &Tuple::new(l(LAB_A), l(NAME), Value::utf8("Lab B"), l(CTX), 0)));
        assert!(!matches(&f, &Tuple::new(l(LAB_A), l(NAME), Value::bytes(b"Lab A".to_vec()), l(CTX), 0)));
    }

    #[test]
    fn label_slot_never_matches_value_object() {
        let f = FilterTemplate::new(Slot::Wildcard, Slot::Wildcard, l(9), Slot::Wildcard).unwrap();
        assert!(!matches(&f, &Tuple::new(l(1), l(2), Value::utf8("x"), l(4), 0)));
    }

    #[test]
    fn ranks() {
        assert_eq!(selectivity_rank(&FilterTemplate::any()), 0);
        let f = FilterTemplate::new(Slot::Wildcard, l(NAME), Value::utf8("Lab A"), Slot::Wildcard).unwrap();
        assert_eq!(selectivity_rank(&f), 2);
        let g = FilterTemplate::ground(&Tuple::new(l(1), l(2), l(3), l(4), 0));
        assert_eq!(selectivity_rank(&g), 4);
    }

    #[test]
    fn values_only_in_object_slot() {
        let v = || Slot::Value(Value::utf8("x"));
        assert_eq!(
            FilterTemplate::new(v(), Slot::Wildcard, Slot::Wildcard, Slot::Wildcard),
            Err(TemplateError::ValueOutOfPlace(Position::Subject))
        );
        assert_eq!(
            FilterTemplate::new(Slot::Wildcard, Slot::Wildcard, Slot::Wildcard, v()),
            Err(TemplateError::ValueOutOfPlace(Position::Context))
        );
    }

    #[test]
    fn parse_text_form() {
        let mut names = NameDirectory::new();
        names.insert("name", l(NAME)).unwrap();
        let f = parse_template("[*, name, 'Lab A', *]", &names).unwrap();
        assert_eq!(
            f,
            FilterTemplate::new(Slot::Wildcard, l(NAME), Value::utf8("Lab A"), Slot::Wildcard).unwrap()
        );
        let uuid = l(LAB_A).to_string();
        let g = parse_template(&format!("[{uuid}, *, *, *]"), &names).unwrap();
        assert_eq!(g.subject(), &Slot::Label(l(LAB_A)));
    }

    #[test]
    fn parse_errors() {
        let names = NameDirectory::new();
        assert!(matches!(
            parse_template("[*, nobody, *, *]", &names),
            Err(TemplateError::UnknownName { pos: 4, .. })
        ));
        assert!(matches!(parse_template("[*, *, *]", &names), Err(TemplateError::Syntax(_))));
        assert!(matches!(parse_template("['x', *, *, *]", &names), Err(TemplateError::ValueOutOfPlace(_))));
        assert!(matches!(parse_template("[*, *, *, *] extra", &names), Err(TemplateError::Syntax(_))));
    }
}
