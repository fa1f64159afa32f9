// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;
use std::fmt;

use crate::label::Label;
use crate::names::NameDirectory;
use crate::syntax::{tokenize, SyntaxError, Token};
use crate::tuple::Position;
use crate::value::Value;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Label(Label),
    Value(Value),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.to_owned())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }
}

impl From<Label> for Term {
    fn from(l: Label) -> Self {
        Term::Label(l)
    }
}

impl From<Value> for Term {
    fn from(v: Value) -> Self {
        Term::Value(v)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Label(l) => write!(f, "{l}"),
            Term::Value(v) => write!(f, "{v:?}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl TriplePattern {
    pub fn new(subject: impl Into<Term>, predicate: impl Into<Term>, object: impl Into<Term>) -> Self {
        TriplePattern { subject: subject.into(), predicate: predicate.into(), object: object.into() }
    }

    pub fn terms(&self) -> [&Term; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    pub fn vars(&self) -> BTreeSet<&str> {
        self.terms().into_iter().filter_map(Term::as_var).collect()
    }
}

impl fmt::Debug for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} {:?} {:?})", self.subject, self.predicate, self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("unknown name {name:?} at offset {pos}")]
    UnknownName { name: String, pos: usize },
    #[error("projected variable ?{0} does not occur in any pattern")]
    UnboundProjection(String),
    #[error("a query needs at least one pattern")]
    NoPatterns,
    #[error("pattern {pattern}: a value can only appear in the object position, not the {position}")]
    ValueOutOfPlace { pattern: usize, position: Position },
}

/// A graph subscription: projected variables over a conjunction of patterns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    projected: Vec<String>,
    patterns: Vec<TriplePattern>,
}

impl Query {
    pub fn new(projected: Vec<String>, patterns: Vec<TriplePattern>) -> Result<Self, QueryError> {
        if patterns.is_empty() {
            return Err(QueryError::NoPatterns);
        }
        for (i, p) in patterns.iter().enumerate() {
            for (t, position) in [(&p.subject, Position::Subject), (&p.predicate, Position::Predicate)] {
                if matches!(t, Term::Value(_)) {
                    return Err(QueryError::ValueOutOfPlace { pattern: i, position });
                }
            }
        }
        for v in &projected {
            if !patterns.iter().any(|p| p.vars().contains(v.as_str())) {
                return Err(QueryError::UnboundProjection(v.clone()));
            }
        }
        Ok(Query { projected, patterns })
    }

    pub fn projected(&self) -> &[String] {
        &self.projected
    }

    pub fn patterns(&self) -> &[TriplePattern] {
        &self.patterns
    }

    pub(crate) fn with_patterns(&self, patterns: Vec<TriplePattern>) -> Self {
        Query { projected: self.projected.clone(), patterns }
    }

    pub fn parse(text: &str, names: &NameDirectory) -> Result<Self, QueryError> {
        parse_query(text, names)
    }
}

/// Parse `SUBSCRIBE ?v (, ?v)* WHERE pattern (. pattern)* [.]`.
///
/// Terms are `?var`, a name or UUID, or a quoted string (object only).
/// Keywords are case-insensitive and commas between projected variables are
/// optional.
pub fn parse_query(text: &str, names: &NameDirectory) -> Result<Query, QueryError> {
    let toks = tokenize(text)?;
    let end = text.len();
    let mut i = 0;

    let keyword = |i: usize, kw: &str| -> Result<(), SyntaxError> {
        match toks.get(i) {
            Some((_, Token::Word(w))) if w.eq_ignore_ascii_case(kw) => Ok(()),
            Some((p, t)) => Err(SyntaxError::new(*p, format!("expected {kw}, found {t}"))),
            None => Err(SyntaxError::new(end, format!("expected {kw}, found end of input"))),
        }
    };

    keyword(i, "SUBSCRIBE")?;
    i += 1;
    let mut projected = Vec::new();
    loop {
        match toks.get(i) {
            Some((_, Token::Var(v))) => {
                if !projected.contains(v) {
                    projected.push(v.clone());
                }
                i += 1;
            }
            Some((p, t)) => {
                return Err(SyntaxError::new(*p, format!("expected a ?variable, found {t}")).into())
            }
            None => return Err(SyntaxError::new(end, "expected a ?variable, found end of input").into()),
        }
        if matches!(toks.get(i), Some((_, Token::Comma))) {
            i += 1;
            continue;
        }
        if matches!(toks.get(i), Some((_, Token::Var(_)))) {
            continue;
        }
        break;
    }
    keyword(i, "WHERE")?;
    i += 1;

    let mut patterns = Vec::new();
    loop {
        let mut terms = Vec::with_capacity(3);
        for _ in 0..3 {
            let term = match toks.get(i) {
                Some((_, Token::Var(v))) => Term::Var(v.clone()),
                Some((_, Token::Quoted(s))) => Term::Value(Value::utf8(s.clone())),
                Some((pos, Token::Word(w))) => Term::Label(
                    names
                        .resolve_term(w)
                        .ok_or_else(|| QueryError::UnknownName { name: w.clone(), pos: *pos })?,
                ),
                Some((p, t)) => return Err(SyntaxError::new(*p, format!("expected a term, found {t}")).into()),
                None => return Err(SyntaxError::new(end, "expected a term, found end of input").into()),
            };
            terms.push(term);
            i += 1;
        }
        let [s, p, o]: [Term; 3] = terms.try_into().expect("three terms");
        patterns.push(TriplePattern::new(s, p, o));
        match toks.get(i) {
            None => break,
            Some((_, Token::Dot)) => {
                i += 1;
                if i == toks.len() {
                    break;
                }
            }
            Some((p, t)) => {
                return Err(SyntaxError::new(*p, format!("expected '.' or end of input, found {t}")).into())
            }
        }
    }
    Query::new(projected, patterns)
}
