//! Recognition of the choice-sequence and choice-set node styles, and
//! closed-form derivation of the derived bundle for preforms in either style.
//!
//! A choice-sequence preform has sequence nodes, contains the empty sequence,
//! and every edge appends its choice to its source. A choice-set preform has
//! set nodes, contains the empty set, and every edge adjoins its choice. For
//! such preforms the whole derived bundle falls out of the node values alone:
//! stages are lengths, predecessors drop the final choice, and precedence is
//! the prefix (respectively subset) order. The closed forms are checked
//! against the generic derivation by the test suite.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::node::{Label, NodeValue, SeqNode, SetNode};
use crate::preform::{Edge, InfoSet, Preform, PreformDerived};
use crate::tree::{Chain, TreeDerived};

/// The first reason, in canonical node/edge order, why a preform is not in
/// the requested style.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StyleViolation {
    #[error("node {0} is not a choice sequence")]
    NonSequenceNode(NodeValue),
    #[error("the empty sequence is not a node")]
    MissingEmptySequence,
    #[error("edge {0} does not append its choice to its source")]
    EdgeNotAppend(Edge),
    #[error("node {0} is not a choice set")]
    NonSetNode(NodeValue),
    #[error("the empty set is not a node")]
    MissingEmptySet,
    #[error("edge {0} does not adjoin its choice to its source")]
    EdgeNotAdjoin(Edge),
}

/// Checks membership in the choice-sequence style.
pub fn is_choice_sequence_preform(pf: &Preform) -> Result<(), StyleViolation> {
    for node in pf.nodes() {
        if node.as_seq().is_none() {
            return Err(StyleViolation::NonSequenceNode(node.clone()));
        }
    }
    if !pf.nodes().contains(&NodeValue::Seq(SeqNode::empty())) {
        return Err(StyleViolation::MissingEmptySequence);
    }
    for edge in pf.edges() {
        let source = edge.source.as_seq().expect("checked above");
        let result = edge.result.as_seq().expect("checked above");
        if &source.append(edge.choice.clone()) != result {
            return Err(StyleViolation::EdgeNotAppend(edge.clone()));
        }
    }
    Ok(())
}

/// Checks membership in the choice-set style.
pub fn is_choice_set_preform(pf: &Preform) -> Result<(), StyleViolation> {
    for node in pf.nodes() {
        if node.as_set().is_none() {
            return Err(StyleViolation::NonSetNode(node.clone()));
        }
    }
    if !pf.nodes().contains(&NodeValue::Set(SetNode::empty())) {
        return Err(StyleViolation::MissingEmptySet);
    }
    for edge in pf.edges() {
        let source = edge.source.as_set().expect("checked above");
        let result = edge.result.as_set().expect("checked above");
        if source.contains(&edge.choice) || &source.adjoin(edge.choice.clone()) != result {
            return Err(StyleViolation::EdgeNotAdjoin(edge.clone()));
        }
    }
    Ok(())
}

/// Derives the bundle of a choice-sequence preform from its node values
/// alone: the root is the empty sequence, predecessors drop the last item,
/// the previous choice is the last item, stages are lengths, precedence is
/// the (proper) prefix order, and a pair is feasible exactly when appending
/// the choice lands in the node set.
pub fn csq_fast_derive(pf: &Preform) -> Result<PreformDerived, StyleViolation> {
    is_choice_sequence_preform(pf)?;
    let seqs: BTreeMap<&NodeValue, &SeqNode> = pf
        .nodes()
        .iter()
        .map(|n| (n, n.as_seq().expect("sequence style")))
        .collect();

    let root = NodeValue::Seq(SeqNode::empty());
    let mut pred = BTreeMap::new();
    let mut prev_choice = BTreeMap::new();
    let mut stage = BTreeMap::new();
    for (node, seq) in &seqs {
        stage.insert((*node).clone(), seq.len());
        if let (Some(parent), Some(last)) = (seq.drop_last(), seq.last()) {
            pred.insert((*node).clone(), NodeValue::Seq(parent));
            prev_choice.insert((*node).clone(), last.clone());
        }
    }

    let mut feasibility: BTreeSet<(NodeValue, Label)> = BTreeSet::new();
    for (node, seq) in &seqs {
        for choice in pf.choices() {
            if pf.nodes().contains(&NodeValue::Seq(seq.append(choice.clone()))) {
                feasibility.insert(((*node).clone(), choice.clone()));
            }
        }
    }
    let decision_nodes: BTreeSet<NodeValue> =
        feasibility.iter().map(|(t, _)| t.clone()).collect();

    let mut strict_prec = BTreeSet::new();
    let mut weak_prec = BTreeSet::new();
    for (a, sa) in &seqs {
        for (b, sb) in &seqs {
            if sa.is_prefix_of(sb) {
                weak_prec.insert(((*a).clone(), (*b).clone()));
                if sa.len() < sb.len() {
                    strict_prec.insert(((*a).clone(), (*b).clone()));
                }
            }
        }
    }

    // Sequence nodes are prefix-closed, so a leaf's chain is its prefix set.
    let mut chains_finite: BTreeSet<Chain> = BTreeSet::new();
    for (node, seq) in &seqs {
        if decision_nodes.contains(*node) {
            continue;
        }
        let chain: Chain = (0..=seq.len())
            .map(|l| NodeValue::Seq(seq.initial_segment(l).expect("within length")))
            .collect();
        chains_finite.insert(chain);
    }

    Ok(PreformDerived {
        feasibility: feasibility.clone(),
        root: root.clone(),
        pred: pred.clone(),
        prev_choice,
        info_sets: info_sets_of(&feasibility),
        decision_nodes: decision_nodes.clone(),
        tree: TreeDerived {
            root,
            decision_nodes,
            stage,
            strict_prec,
            weak_prec,
            chains_finite,
            chains_infinite: BTreeSet::new(),
        },
    })
}

/// Derives the bundle of a choice-set preform from its node values alone:
/// the root is the empty set, stages are cardinalities, precedence is the
/// (proper) subset order, a pair is feasible when adjoining the fresh choice
/// lands in the node set, and the previous choice of a node is the unique
/// element whose removal lands in the node set.
pub fn cset_fast_derive(pf: &Preform) -> Result<PreformDerived, StyleViolation> {
    is_choice_set_preform(pf)?;
    let sets: BTreeMap<&NodeValue, &SetNode> = pf
        .nodes()
        .iter()
        .map(|n| (n, n.as_set().expect("set style")))
        .collect();

    let root = NodeValue::Set(SetNode::empty());
    let mut pred = BTreeMap::new();
    let mut prev_choice = BTreeMap::new();
    let mut stage = BTreeMap::new();
    for (node, set) in &sets {
        stage.insert((*node).clone(), set.len());
        if set.is_empty() {
            continue;
        }
        let mut producers = set
            .items()
            .iter()
            .filter(|c| pf.nodes().contains(&NodeValue::Set(set.remove(c))));
        let choice = producers.next().expect("validated choice-set preform").clone();
        assert!(
            producers.next().is_none(),
            "two removals of {node} land in the node set"
        );
        pred.insert((*node).clone(), NodeValue::Set(set.remove(&choice)));
        prev_choice.insert((*node).clone(), choice);
    }

    let mut feasibility: BTreeSet<(NodeValue, Label)> = BTreeSet::new();
    for (node, set) in &sets {
        for choice in pf.choices() {
            if !set.contains(choice)
                && pf.nodes().contains(&NodeValue::Set(set.adjoin(choice.clone())))
            {
                feasibility.insert(((*node).clone(), choice.clone()));
            }
        }
    }
    let decision_nodes: BTreeSet<NodeValue> =
        feasibility.iter().map(|(t, _)| t.clone()).collect();

    let mut strict_prec = BTreeSet::new();
    let mut weak_prec = BTreeSet::new();
    for (a, sa) in &sets {
        for (b, sb) in &sets {
            if sa.is_subset(sb) {
                weak_prec.insert(((*a).clone(), (*b).clone()));
                if sa.len() < sb.len() {
                    strict_prec.insert(((*a).clone(), (*b).clone()));
                }
            }
        }
    }

    // Ancestors of a node are exactly the node-set members below it in the
    // subset order, so a leaf's chain is its subset cone.
    let mut chains_finite: BTreeSet<Chain> = BTreeSet::new();
    for (node, set) in &sets {
        if decision_nodes.contains(*node) {
            continue;
        }
        let chain: Chain = sets
            .iter()
            .filter(|(_, s)| s.is_subset(set))
            .map(|(n, _)| (*n).clone())
            .collect();
        chains_finite.insert(chain);
    }

    Ok(PreformDerived {
        feasibility: feasibility.clone(),
        root: root.clone(),
        pred: pred.clone(),
        prev_choice,
        info_sets: info_sets_of(&feasibility),
        decision_nodes: decision_nodes.clone(),
        tree: TreeDerived {
            root,
            decision_nodes,
            stage,
            strict_prec,
            weak_prec,
            chains_finite,
            chains_infinite: BTreeSet::new(),
        },
    })
}

fn info_sets_of(feasibility: &BTreeSet<(NodeValue, Label)>) -> BTreeSet<InfoSet> {
    let mut preimage: BTreeMap<&Label, InfoSet> = BTreeMap::new();
    for (node, choice) in feasibility {
        preimage.entry(choice).or_default().insert(node.clone());
    }
    preimage.into_values().collect()
}

/// The four equivalent ways of saying that a set node `t_sharp` extends `t`
/// by the single fresh choice `c`:
///
/// 1. `c ∉ t` and `t ∪ {c} = t#`;
/// 2. `t ≠ t#` and `t ∪ {c} = t#`;
/// 3. `t ≠ t#` and `t = t# ∖ {c}`;
/// 4. `t ⊆ t#` and `t# ∖ t = {c}`.
///
/// The four answers always agree; the sweep asserting so lives in the tests.
pub fn adjoin_equivalents(t: &SetNode, c: &Label, t_sharp: &SetNode) -> [bool; 4] {
    let adjoined = t.adjoin(c.clone());
    let removed = t_sharp.remove(c);
    let diff: BTreeSet<&Label> = t_sharp.items().difference(t.items()).collect();
    [
        !t.contains(c) && &adjoined == t_sharp,
        t != t_sharp && &adjoined == t_sharp,
        t != t_sharp && *t == removed,
        t.is_subset(t_sharp) && diff.len() == 1 && diff.contains(c),
    ]
}
