//! Node-and-choice preforms: a node set, a choice set, and an edge relation
//! that is a bijection from the feasible (node, choice) pairs onto the
//! non-root nodes, inducing a functioned tree and a partition of the decision
//! nodes into information sets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::node::{Label, NodeValue};
use crate::tree::{Tree, TreeDerived, TreeError};

/// One element of the edge relation: `source` under `choice` yields `result`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub source: NodeValue,
    pub choice: Label,
    pub result: NodeValue,
}

impl Edge {
    pub fn new(source: NodeValue, choice: Label, result: NodeValue) -> Self {
        Edge { source, choice, result }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.source, self.choice, self.result)
    }
}

/// An information set: the nodes sharing one block of the choice partition.
pub type InfoSet = BTreeSet<NodeValue>;

/// Why a candidate `(nodes, choices, edges)` triple is not a preform.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PreformError {
    #[error("P1Violation: {0}")]
    P1(String),
    #[error("P2Violation: {0}")]
    P2(TreeError),
    #[error(
        "P3Violation: preimages of {choice_a} and {choice_b} overlap at {shared} but differ"
    )]
    P3Overlap {
        choice_a: Label,
        choice_b: Label,
        shared: NodeValue,
    },
    #[error("P3Violation: choice {0} appears on no edge, so its preimage is empty")]
    P3UnusedChoice(Label),
}

impl PreformError {
    pub fn axiom(&self) -> &'static str {
        match self {
            PreformError::P1(_) => "P1",
            PreformError::P2(_) => "P2",
            PreformError::P3Overlap { .. } | PreformError::P3UnusedChoice(_) => "P3",
        }
    }
}

/// Node not present in the object it was looked up against.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown node {0}")]
pub struct UnknownNode(pub NodeValue);

/// Everything a preform determines beyond its raw components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreformDerived {
    /// The feasible (node, choice) pairs: the domain of the edge relation.
    pub feasibility: BTreeSet<(NodeValue, Label)>,
    pub root: NodeValue,
    pub pred: BTreeMap<NodeValue, NodeValue>,
    /// The choice that produced each non-root node.
    pub prev_choice: BTreeMap<NodeValue, Label>,
    pub info_sets: BTreeSet<InfoSet>,
    pub decision_nodes: BTreeSet<NodeValue>,
    pub tree: TreeDerived,
}

/// A validated preform. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preform {
    nodes: BTreeSet<NodeValue>,
    choices: BTreeSet<Label>,
    edges: BTreeSet<Edge>,
    derived: PreformDerived,
}

impl Preform {
    /// Checks the three preform axioms. Edges are taken with set semantics:
    /// exact duplicate triples collapse before anything is checked, while two
    /// triples agreeing on (source, choice) but not on result stay distinct
    /// and fail the bijectivity requirement.
    pub fn validate(
        nodes: impl IntoIterator<Item = NodeValue>,
        choices: impl IntoIterator<Item = Label>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Preform, PreformError> {
        let nodes: BTreeSet<NodeValue> = nodes.into_iter().collect();
        let choices: BTreeSet<Label> = choices.into_iter().collect();
        let edges: BTreeSet<Edge> = edges.into_iter().collect();

        // P1: the edge relation is a bijection from its domain onto the
        // non-root nodes, within declared nodes and choices.
        for edge in &edges {
            if !nodes.contains(&edge.source) {
                return Err(PreformError::P1(format!(
                    "edge {edge} starts at a value that is not a node"
                )));
            }
            if !nodes.contains(&edge.result) {
                return Err(PreformError::P1(format!(
                    "edge {edge} produces a value that is not a node"
                )));
            }
            if !choices.contains(&edge.choice) {
                return Err(PreformError::P1(format!(
                    "edge {edge} uses an undeclared choice"
                )));
            }
        }
        let mut by_pair: BTreeMap<(&NodeValue, &Label), &Edge> = BTreeMap::new();
        for edge in &edges {
            if let Some(prior) = by_pair.insert((&edge.source, &edge.choice), edge) {
                return Err(PreformError::P1(format!(
                    "edges {prior} and {edge} share a (node, choice) pair"
                )));
            }
        }
        let mut produced_by: BTreeMap<&NodeValue, &Edge> = BTreeMap::new();
        for edge in &edges {
            if let Some(prior) = produced_by.insert(&edge.result, edge) {
                return Err(PreformError::P1(format!(
                    "edges {prior} and {edge} produce the same node"
                )));
            }
        }

        // P2: the induced predecessor relation yields a functioned tree. The
        // tree validator also rejects an empty edge set and re-derives the
        // unique root.
        let pred_pairs: Vec<(NodeValue, NodeValue)> = edges
            .iter()
            .map(|e| (e.result.clone(), e.source.clone()))
            .collect();
        let tree =
            Tree::validate(nodes.iter().cloned(), pred_pairs).map_err(PreformError::P2)?;

        // P3: the choice preimages partition the decision nodes.
        let mut preimage: BTreeMap<&Label, BTreeSet<&NodeValue>> = BTreeMap::new();
        for edge in &edges {
            preimage.entry(&edge.choice).or_default().insert(&edge.source);
        }
        for choice in &choices {
            if !preimage.contains_key(choice) {
                return Err(PreformError::P3UnusedChoice(choice.clone()));
            }
        }
        let classes: Vec<(&Label, &BTreeSet<&NodeValue>)> =
            preimage.iter().map(|(c, s)| (*c, s)).collect();
        for (i, (choice_a, set_a)) in classes.iter().enumerate() {
            for (choice_b, set_b) in &classes[i + 1..] {
                if set_a != set_b {
                    if let Some(shared) = set_a.intersection(set_b).next() {
                        return Err(PreformError::P3Overlap {
                            choice_a: (*choice_a).clone(),
                            choice_b: (*choice_b).clone(),
                            shared: (**shared).clone(),
                        });
                    }
                }
            }
        }

        let derived = derive(&edges, tree);
        Ok(Preform { nodes, choices, edges, derived })
    }

    pub fn nodes(&self) -> &BTreeSet<NodeValue> {
        &self.nodes
    }

    pub fn choices(&self) -> &BTreeSet<Label> {
        &self.choices
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    /// The derived bundle, computed once at validation.
    pub fn derived(&self) -> &PreformDerived {
        &self.derived
    }

    pub fn root(&self) -> &NodeValue {
        &self.derived.root
    }

    /// The choices feasible at `node`; empty on terminal nodes.
    pub fn feasible_at(&self, node: &NodeValue) -> Result<BTreeSet<Label>, UnknownNode> {
        if !self.nodes.contains(node) {
            return Err(UnknownNode(node.clone()));
        }
        Ok(self
            .edges
            .iter()
            .filter(|e| &e.source == node)
            .map(|e| e.choice.clone())
            .collect())
    }

    /// The node reached from `source` by `choice`, if that pair is feasible.
    pub fn apply(&self, source: &NodeValue, choice: &Label) -> Option<&NodeValue> {
        self.edges
            .iter()
            .find(|e| &e.source == source && &e.choice == choice)
            .map(|e| &e.result)
    }

    /// The union of feasible sets over an information set.
    pub fn feasible_over(&self, set: &InfoSet) -> BTreeSet<Label> {
        self.edges
            .iter()
            .filter(|e| set.contains(&e.source))
            .map(|e| e.choice.clone())
            .collect()
    }
}

fn derive(edges: &BTreeSet<Edge>, tree: Tree) -> PreformDerived {
    let feasibility: BTreeSet<(NodeValue, Label)> = edges
        .iter()
        .map(|e| (e.source.clone(), e.choice.clone()))
        .collect();
    let prev_choice: BTreeMap<NodeValue, Label> = edges
        .iter()
        .map(|e| (e.result.clone(), e.choice.clone()))
        .collect();

    let mut preimage: BTreeMap<&Label, InfoSet> = BTreeMap::new();
    for edge in edges {
        preimage.entry(&edge.choice).or_default().insert(edge.source.clone());
    }
    let info_sets: BTreeSet<InfoSet> = preimage.into_values().collect();

    let derived_tree = tree.derived().clone();
    PreformDerived {
        feasibility,
        root: derived_tree.root.clone(),
        pred: tree.pred().clone(),
        prev_choice,
        decision_nodes: derived_tree.decision_nodes.clone(),
        info_sets,
        tree: derived_tree,
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::node::{label, NodeValue as N};

    fn seq(items: &[&str]) -> NodeValue {
        N::seq(items.iter().copied())
    }

    fn edge(source: &[&str], choice: &str, result: &[&str]) -> Edge {
        Edge::new(seq(source), label(choice), seq(result))
    }

    /// Single information set spanning the root and its `a`-child; the mover
    /// cannot tell how often they have already moved.
    pub fn absentminded_preform() -> Preform {
        Preform::validate(
            [seq(&[]), seq(&["a"]), seq(&["b"]), seq(&["a", "a"]), seq(&["a", "b"])],
            [label("a"), label("b")],
            [
                edge(&[], "a", &["a"]),
                edge(&[], "b", &["b"]),
                edge(&["a"], "a", &["a", "a"]),
                edge(&["a"], "b", &["a", "b"]),
            ],
        )
        .expect("valid preform")
    }

    /// Two stages, the second played in ignorance of the first.
    pub fn simultaneous_preform() -> Preform {
        Preform::validate(
            [
                seq(&[]),
                seq(&["a"]),
                seq(&["b"]),
                seq(&["a", "c"]),
                seq(&["a", "d"]),
                seq(&["b", "c"]),
                seq(&["b", "d"]),
            ],
            [label("a"), label("b"), label("c"), label("d")],
            [
                edge(&[], "a", &["a"]),
                edge(&[], "b", &["b"]),
                edge(&["a"], "c", &["a", "c"]),
                edge(&["a"], "d", &["a", "d"]),
                edge(&["b"], "c", &["b", "c"]),
                edge(&["b"], "d", &["b", "d"]),
            ],
        )
        .expect("valid preform")
    }

    pub fn minimal_preform() -> Preform {
        Preform::validate(
            [N::atom("r"), N::atom("x")],
            [label("a")],
            [Edge::new(N::atom("r"), label("a"), N::atom("x"))],
        )
        .expect("valid preform")
    }
}
