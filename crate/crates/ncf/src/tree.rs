//! Functioned trees: a finite node set with a predecessor function under
//! which every non-root node reaches the unique root in finitely many steps.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::node::{fmt_nodes, NodeValue};

/// A set of nodes regarded as one maximal chain of the weak precedence order.
pub type Chain = BTreeSet<NodeValue>;

/// Why a candidate `(nodes, pred)` pair is not a functioned tree.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("T1Violation: the predecessor map is empty")]
    EmptyPred,
    #[error("T1Violation: {child} has predecessor {parent}, which is not a node")]
    ParentNotANode { child: NodeValue, parent: NodeValue },
    #[error("T1Violation: {node} has a predecessor entry but is not a node")]
    EntryNotANode { node: NodeValue },
    #[error("T1Violation: several nodes lack a predecessor: {}", fmt_nodes(.0))]
    MultipleRoots(Vec<NodeValue>),
    #[error("T2Violation: predecessor cycle: {}", fmt_nodes(.0))]
    Cycle(Vec<NodeValue>),
}

impl TreeError {
    pub fn axiom(&self) -> &'static str {
        match self {
            TreeError::Cycle(_) => "T2",
            _ => "T1",
        }
    }
}

/// Everything a functioned tree determines beyond its raw components.
///
/// `chains_infinite` is always empty here because the node set is finite; the
/// field is kept so that chain-related checks can quantify over both kinds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDerived {
    pub root: NodeValue,
    /// Nodes with at least one successor (the range of `pred`).
    pub decision_nodes: BTreeSet<NodeValue>,
    /// Distance from the root.
    pub stage: BTreeMap<NodeValue, usize>,
    /// Pairs `(a, b)` with `a` a strict iterated predecessor of `b`.
    pub strict_prec: BTreeSet<(NodeValue, NodeValue)>,
    pub weak_prec: BTreeSet<(NodeValue, NodeValue)>,
    pub chains_finite: BTreeSet<Chain>,
    pub chains_infinite: BTreeSet<Chain>,
}

/// A validated functioned tree. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    nodes: BTreeSet<NodeValue>,
    pred: BTreeMap<NodeValue, NodeValue>,
    derived: TreeDerived,
}

impl Tree {
    /// Checks the two tree axioms and, on success, eagerly computes the
    /// derived bundle. The root is inferred as the unique node without a
    /// predecessor entry.
    pub fn validate(
        nodes: impl IntoIterator<Item = NodeValue>,
        pred: impl IntoIterator<Item = (NodeValue, NodeValue)>,
    ) -> Result<Tree, TreeError> {
        let nodes: BTreeSet<NodeValue> = nodes.into_iter().collect();
        let pred: BTreeMap<NodeValue, NodeValue> = pred.into_iter().collect();

        if pred.is_empty() {
            return Err(TreeError::EmptyPred);
        }
        for (child, parent) in &pred {
            if !nodes.contains(child) {
                return Err(TreeError::EntryNotANode { node: child.clone() });
            }
            if !nodes.contains(parent) {
                return Err(TreeError::ParentNotANode {
                    child: child.clone(),
                    parent: parent.clone(),
                });
            }
        }
        let mut rootless: Vec<NodeValue> =
            nodes.iter().filter(|n| !pred.contains_key(*n)).cloned().collect();
        let root = match rootless.len() {
            // Every node has a predecessor, so some walk must revisit a node.
            0 => {
                let start = nodes.iter().next().expect("pred nonempty implies nodes");
                let mut path = vec![start.clone()];
                loop {
                    let up = pred[path.last().expect("nonempty path")].clone();
                    if let Some(from) = path.iter().position(|n| *n == up) {
                        return Err(TreeError::Cycle(path[from..].to_vec()));
                    }
                    path.push(up);
                }
            }
            1 => rootless.pop().expect("one candidate"),
            _ => return Err(TreeError::MultipleRoots(rootless)),
        };

        // Walk upward from every node; a repeat before reaching the root is a cycle.
        let mut stage: BTreeMap<NodeValue, usize> = BTreeMap::new();
        stage.insert(root.clone(), 0);
        for start in &nodes {
            if stage.contains_key(start) {
                continue;
            }
            let mut path = vec![start.clone()];
            let mut seen: BTreeSet<NodeValue> = [start.clone()].into();
            loop {
                let here = path.last().expect("nonempty path");
                if stage.contains_key(here) {
                    break;
                }
                let up = pred[here].clone();
                if seen.contains(&up) {
                    let from = path.iter().position(|n| *n == up).expect("seen on path");
                    return Err(TreeError::Cycle(path[from..].to_vec()));
                }
                seen.insert(up.clone());
                path.push(up);
            }
            let base = stage[path.last().expect("nonempty path")];
            for (back, node) in path.iter().rev().skip(1).enumerate() {
                stage.insert(node.clone(), base + back + 1);
            }
        }

        let derived = derive(&nodes, &pred, root, stage);
        Ok(Tree { nodes, pred, derived })
    }

    pub fn nodes(&self) -> &BTreeSet<NodeValue> {
        &self.nodes
    }

    pub fn pred(&self) -> &BTreeMap<NodeValue, NodeValue> {
        &self.pred
    }

    /// The derived bundle, computed once at validation.
    pub fn derived(&self) -> &TreeDerived {
        &self.derived
    }

    pub fn root(&self) -> &NodeValue {
        &self.derived.root
    }
}

fn derive(
    nodes: &BTreeSet<NodeValue>,
    pred: &BTreeMap<NodeValue, NodeValue>,
    root: NodeValue,
    stage: BTreeMap<NodeValue, usize>,
) -> TreeDerived {
    let decision_nodes: BTreeSet<NodeValue> = pred.values().cloned().collect();

    let mut strict_prec = BTreeSet::new();
    let mut weak_prec = BTreeSet::new();
    for node in nodes {
        weak_prec.insert((node.clone(), node.clone()));
        let mut up = node;
        while let Some(parent) = pred.get(up) {
            strict_prec.insert((parent.clone(), node.clone()));
            weak_prec.insert((parent.clone(), node.clone()));
            up = parent;
        }
    }

    // Each maximal chain of the weak order is the full ancestor path of a leaf.
    let mut chains_finite = BTreeSet::new();
    for leaf in nodes.iter().filter(|n| !decision_nodes.contains(*n)) {
        let mut chain: Chain = [leaf.clone()].into();
        let mut up = leaf;
        while let Some(parent) = pred.get(up) {
            chain.insert(parent.clone());
            up = parent;
        }
        chains_finite.insert(chain);
    }

    TreeDerived {
        root,
        decision_nodes,
        stage,
        strict_prec,
        weak_prec,
        chains_finite,
        chains_infinite: BTreeSet::new(),
    }
}
