//! Concept and relation identifiers shared by every module.

use std::borrow::Borrow;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Normalize a raw concept label: lowercase, split on whitespace, strip ASCII
/// punctuation from token edges, drop tokens left empty and rejoin with single
/// spaces.
pub fn normalize(raw: &str) -> String {
    let lower = raw.to_lowercase();
    let mut out = String::with_capacity(lower.len());
    for token in lower.split_whitespace() {
        let token = token.trim_matches(|c: char| c.is_ascii_punctuation());
        if token.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(token);
    }
    out
}

/// A node of a semantic network. The label is always normalized and non-empty.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Concept(Arc<str>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("concept label {0:?} is empty after normalization")]
pub struct EmptyLabel(pub String);

impl Concept {
    pub fn new(raw: &str) -> Result<Self, EmptyLabel> {
        let label = normalize(raw);
        if label.is_empty() {
            return Err(EmptyLabel(raw.to_owned()));
        }
        Ok(Concept(label.into()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Concept {
    type Error = EmptyLabel;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Concept::new(&value)
    }
}

impl From<Concept> for String {
    fn from(c: Concept) -> String {
        c.0.to_string()
    }
}

impl Borrow<str> for Concept {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// Name of a binary relation, e.g. `IsA` or `AtLocation`. Compared
/// case-sensitively.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RelationLabel(Arc<str>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid relation label {0:?}")]
pub struct InvalidLabel(pub String);

impl RelationLabel {
    pub fn new(name: &str) -> Result<Self, InvalidLabel> {
        let name = name.trim();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(InvalidLabel(name.to_owned()));
        }
        Ok(RelationLabel(name.into()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for RelationLabel {
    type Error = InvalidLabel;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        RelationLabel::new(&value)
    }
}

impl From<RelationLabel> for String {
    fn from(l: RelationLabel) -> String {
        l.0.to_string()
    }
}

impl fmt::Display for RelationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for RelationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Which argument slot of a relation a concept occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Position {
    Head,
    Tail,
}

/// A directed labeled binary relation `label(head, tail)`.
///
/// The derived ordering (label, then head, then tail) is the canonical order
/// used for every serialized artifact.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Relation {
    pub label: RelationLabel,
    pub head: Concept,
    pub tail: Concept,
}

impl Relation {
    pub fn new(label: RelationLabel, head: Concept, tail: Concept) -> Self {
        Relation { label, head, tail }
    }

    /// Build a relation from raw strings, normalizing the concepts.
    ///
    /// Intended for literals in tests and examples; panics on invalid input.
    pub fn parse(label: &str, head: &str, tail: &str) -> Self {
        Relation {
            label: RelationLabel::new(label).expect("valid relation label"),
            head: Concept::new(head).expect("valid head concept"),
            tail: Concept::new(tail).expect("valid tail concept"),
        }
    }

    pub fn involves(&self, c: &Concept) -> bool {
        &self.head == c || &self.tail == c
    }

    pub fn is_self_loop(&self) -> bool {
        self.head == self.tail
    }

    /// The concept at the opposite end from `c`, if `c` is an endpoint.
    pub fn other(&self, c: &Concept) -> Option<&Concept> {
        if &self.head == c {
            Some(&self.tail)
        } else if &self.tail == c {
            Some(&self.head)
        } else {
            None
        }
    }

    pub fn position_of(&self, c: &Concept) -> Option<Position> {
        if &self.head == c {
            Some(Position::Head)
        } else if &self.tail == c {
            Some(Position::Tail)
        } else {
            None
        }
    }

    /// Replace every occurrence of `from` by `to`.
    pub fn substitute(&self, from: &Concept, to: &Concept) -> Relation {
        let swap = |c: &Concept| if c == from { to.clone() } else { c.clone() };
        Relation {
            label: self.label.clone(),
            head: swap(&self.head),
            tail: swap(&self.tail),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {})", self.label, self.head, self.tail)
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
