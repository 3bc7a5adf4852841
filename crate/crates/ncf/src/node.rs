//! Node and choice atoms.
//!
//! A [`Label`] is the opaque identifier used for choices, players, and atom
//! nodes. A [`NodeValue`] is a node of a game tree: either an opaque atom, an
//! ordered sequence of choice labels, or a finite set of choice labels. The
//! three variants are structurally distinct: `[a,b]`, `{a,b}`, and `@ab` are
//! three different nodes.

use std::borrow::Borrow;
use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// A nonempty identifier over ASCII letters, digits, and underscore.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(String);

/// Rejected identifier text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("empty identifier")]
    Empty,
    #[error("identifier {0:?} contains a character outside [A-Za-z0-9_]")]
    BadCharacter(String),
}

impl Label {
    pub fn new(token: impl Into<String>) -> Result<Self, LabelError> {
        let token = token.into();
        if token.is_empty() {
            return Err(LabelError::Empty);
        }
        if !token.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
            return Err(LabelError::BadCharacter(token));
        }
        Ok(Label(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for Label {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Shorthand used pervasively by tests and fixtures; panics on bad input.
pub fn label(token: &str) -> Label {
    Label::new(token).expect("valid label token")
}

/// An ordered, possibly empty sequence of choice labels.
///
/// Equality is positional: `(a,b)` and `(b,a)` differ, and repeated items are
/// kept, so `|t|` counts positions rather than distinct items.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SeqNode(Vec<Label>);

/// Requested an initial segment longer than the sequence.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("initial segment of length {requested} from a sequence of length {length}")]
pub struct LengthOutOfRange {
    pub requested: usize,
    pub length: usize,
}

impl SeqNode {
    pub fn new(items: impl IntoIterator<Item = Label>) -> Self {
        SeqNode(items.into_iter().collect())
    }

    pub fn empty() -> Self {
        SeqNode(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn items(&self) -> &[Label] {
        &self.0
    }

    /// The set of distinct items occurring in the sequence.
    pub fn range(&self) -> BTreeSet<Label> {
        self.0.iter().cloned().collect()
    }

    /// The sequence with `other`'s positions appended after `self`'s.
    pub fn concat(&self, other: &SeqNode) -> SeqNode {
        let mut items = self.0.clone();
        items.extend(other.0.iter().cloned());
        SeqNode(items)
    }

    /// The sequence extended by one final item.
    pub fn append(&self, item: Label) -> SeqNode {
        let mut items = self.0.clone();
        items.push(item);
        SeqNode(items)
    }

    /// The first `len` positions.
    pub fn initial_segment(&self, len: usize) -> Result<SeqNode, LengthOutOfRange> {
        if len > self.0.len() {
            return Err(LengthOutOfRange {
                requested: len,
                length: self.0.len(),
            });
        }
        Ok(SeqNode(self.0[..len].to_vec()))
    }

    /// All but the last position; `None` for the empty sequence.
    pub fn drop_last(&self) -> Option<SeqNode> {
        if self.0.is_empty() {
            None
        } else {
            Some(SeqNode(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn last(&self) -> Option<&Label> {
        self.0.last()
    }

    /// True iff `self` is an initial segment of `other` with strictly smaller length.
    pub fn is_proper_prefix_of(&self, other: &SeqNode) -> bool {
        self.0.len() < other.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    /// True iff `self` is an initial segment of `other` (possibly all of it).
    pub fn is_prefix_of(&self, other: &SeqNode) -> bool {
        self.0.len() <= other.0.len() && other.0[..self.0.len()] == self.0[..]
    }
}

/// A finite set of choice labels; duplicates cannot be represented.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SetNode(BTreeSet<Label>);

impl SetNode {
    pub fn new(items: impl IntoIterator<Item = Label>) -> Self {
        SetNode(items.into_iter().collect())
    }

    pub fn empty() -> Self {
        SetNode(BTreeSet::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn items(&self) -> &BTreeSet<Label> {
        &self.0
    }

    pub fn contains(&self, item: &Label) -> bool {
        self.0.contains(item)
    }

    /// The set with one more element adjoined (a no-op if already present).
    pub fn adjoin(&self, item: Label) -> SetNode {
        let mut items = self.0.clone();
        items.insert(item);
        SetNode(items)
    }

    pub fn remove(&self, item: &Label) -> SetNode {
        let mut items = self.0.clone();
        items.remove(item);
        SetNode(items)
    }

    pub fn is_subset(&self, other: &SetNode) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_proper_subset(&self, other: &SetNode) -> bool {
        self.0.len() < other.0.len() && self.0.is_subset(&other.0)
    }
}

/// A node label: an opaque atom, a choice-sequence, or a choice-set.
///
/// The derived ordering (atoms, then sequences, then sets, each compared by
/// content) is the canonical node order used by every deterministic scan and
/// witness report in this crate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeValue {
    Atom(Label),
    Seq(SeqNode),
    Set(SetNode),
}

impl NodeValue {
    pub fn atom(token: &str) -> Self {
        NodeValue::Atom(label(token))
    }

    pub fn seq<'a>(items: impl IntoIterator<Item = &'a str>) -> Self {
        NodeValue::Seq(SeqNode::new(items.into_iter().map(label)))
    }

    pub fn set<'a>(items: impl IntoIterator<Item = &'a str>) -> Self {
        NodeValue::Set(SetNode::new(items.into_iter().map(label)))
    }

    pub fn as_seq(&self) -> Option<&SeqNode> {
        match self {
            NodeValue::Seq(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_set(&self) -> Option<&SetNode> {
        match self {
            NodeValue::Set(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for NodeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeValue::Atom(l) => write!(f, "@{l}"),
            NodeValue::Seq(s) => {
                f.write_str("[")?;
                for (i, item) in s.items().iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("]")
            }
            NodeValue::Set(s) => {
                f.write_str("{")?;
                for (i, item) in s.items().iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("}")
            }
        }
    }
}

/// Renders a node collection as `a, b, c` for error messages.
pub(crate) fn fmt_nodes<'a>(nodes: impl IntoIterator<Item = &'a NodeValue>) -> String {
    nodes
        .into_iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}
