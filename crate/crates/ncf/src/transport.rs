//! Rebuilding an object along bijections so that the bijections become an
//! isomorphism, and the two constructive style converters built on top of
//! that: every form is isomorphic to a choice-sequence form via its
//! choice-history map, and every no-absentminded choice-sequence form is
//! isomorphic to a choice-set form via taking ranges.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::form::Form;
use crate::morphism::{FormMorphism, IsoWitness, PreformMorphism};
use crate::node::{Label, NodeValue, SeqNode, SetNode};
use crate::preform::{Edge, Preform, UnknownNode};
use crate::properties::no_absentmindedness;
use crate::styles::{is_choice_sequence_preform, is_choice_set_preform, StyleViolation};
use crate::tree::Tree;

/// The three bijections along which a form is transported.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportSpec {
    pub player_bij: BTreeMap<Label, Label>,
    pub node_bij: BTreeMap<NodeValue, NodeValue>,
    pub choice_bij: BTreeMap<Label, Label>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("NotBijective: {0}")]
pub struct NotBijective(String);

fn check_bijection<K: Ord + std::fmt::Display, V: Ord>(
    what: &str,
    domain: &BTreeSet<K>,
    map: &BTreeMap<K, V>,
) -> Result<(), NotBijective> {
    for key in domain {
        if !map.contains_key(key) {
            return Err(NotBijective(format!("{what} is undefined at {key}")));
        }
    }
    if let Some(extra) = map.keys().find(|k| !domain.contains(k)) {
        return Err(NotBijective(format!(
            "{what} has an entry for {extra}, which is outside the domain"
        )));
    }
    let image: BTreeSet<&V> = map.values().collect();
    if image.len() != map.len() {
        return Err(NotBijective(format!("{what} is not injective")));
    }
    Ok(())
}

/// Transports a functioned tree along a node bijection; the result is again
/// a functioned tree.
pub fn transport_tree(
    tree: &Tree,
    node_bij: &BTreeMap<NodeValue, NodeValue>,
) -> Result<Tree, NotBijective> {
    check_bijection("node bijection", tree.nodes(), node_bij)?;
    let nodes: BTreeSet<NodeValue> = node_bij.values().cloned().collect();
    let pred = tree
        .pred()
        .iter()
        .map(|(child, parent)| (node_bij[child].clone(), node_bij[parent].clone()));
    Ok(Tree::validate(nodes, pred).expect("a transported tree is a tree"))
}

/// Transports a preform along node and choice bijections, returning the new
/// preform together with the isomorphism onto it.
pub fn transport_preform(
    preform: &Preform,
    node_bij: &BTreeMap<NodeValue, NodeValue>,
    choice_bij: &BTreeMap<Label, Label>,
) -> Result<(Preform, PreformMorphism), NotBijective> {
    check_bijection("node bijection", preform.nodes(), node_bij)?;
    check_bijection("choice bijection", preform.choices(), choice_bij)?;
    let nodes: BTreeSet<NodeValue> = node_bij.values().cloned().collect();
    let choices: BTreeSet<Label> = choice_bij.values().cloned().collect();
    let edges = preform.edges().iter().map(|e| {
        Edge::new(
            node_bij[&e.source].clone(),
            choice_bij[&e.choice].clone(),
            node_bij[&e.result].clone(),
        )
    });
    let image =
        Preform::validate(nodes, choices, edges).expect("a transported preform is a preform");
    let morphism = PreformMorphism::validate(
        preform.clone(),
        image.clone(),
        node_bij.clone(),
        choice_bij.clone(),
    )
    .expect("transport bijections form a morphism");
    debug_assert!(morphism.is_isomorphism());
    Ok((image, morphism))
}

/// Transports a form along a [`TransportSpec`]; the image assigns to each
/// image player the image of the original player's choices.
pub fn transport_form(form: &Form, spec: &TransportSpec) -> Result<(Form, IsoWitness), NotBijective> {
    let players: BTreeSet<Label> = form.players().cloned().collect();
    check_bijection("player bijection", &players, &spec.player_bij)?;
    check_bijection("node bijection", form.nodes(), &spec.node_bij)?;
    check_bijection("choice bijection", form.choices(), &spec.choice_bij)?;

    let assignment: BTreeMap<Label, BTreeSet<Label>> = form
        .assignment()
        .iter()
        .map(|(player, owned)| {
            (
                spec.player_bij[player].clone(),
                owned.iter().map(|c| spec.choice_bij[c].clone()).collect(),
            )
        })
        .collect();
    let nodes: BTreeSet<NodeValue> = spec.node_bij.values().cloned().collect();
    let edges = form.edges().iter().map(|e| {
        Edge::new(
            spec.node_bij[&e.source].clone(),
            spec.choice_bij[&e.choice].clone(),
            spec.node_bij[&e.result].clone(),
        )
    });
    let image = Form::validate(assignment, nodes, edges).expect("a transported form is a form");
    let witness = FormMorphism::validate(
        form.clone(),
        image.clone(),
        spec.player_bij.clone(),
        spec.node_bij.clone(),
        spec.choice_bij.clone(),
    )
    .expect("transport bijections form a morphism")
    .invert()
    .expect("transport bijections form an isomorphism");
    Ok((image, witness))
}

/// The choice history of a node: the previous choices read off the
/// predecessor walk from the root down to the node.
pub fn sequence_node_of(preform: &Preform, node: &NodeValue) -> Result<SeqNode, UnknownNode> {
    if !preform.nodes().contains(node) {
        return Err(UnknownNode(node.clone()));
    }
    let derived = preform.derived();
    let mut rev = Vec::new();
    let mut here = node;
    while let Some(choice) = derived.prev_choice.get(here) {
        rev.push(choice.clone());
        here = &derived.pred[here];
    }
    rev.reverse();
    Ok(SeqNode::new(rev))
}

/// The missing fold step when replaying a history.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("NoSuchPath: no edge from {at} under {choice}")]
pub struct NoSuchPath {
    pub at: NodeValue,
    pub choice: Label,
}

/// Replays a choice history from the root, inverting [`sequence_node_of`].
pub fn from_sequence_node(preform: &Preform, history: &SeqNode) -> Result<NodeValue, NoSuchPath> {
    let mut here = preform.root().clone();
    for choice in history.items() {
        here = preform
            .apply(&here, choice)
            .ok_or_else(|| NoSuchPath { at: here.clone(), choice: choice.clone() })?
            .clone();
    }
    Ok(here)
}

fn history_bijection(preform: &Preform) -> BTreeMap<NodeValue, NodeValue> {
    let map: BTreeMap<NodeValue, NodeValue> = preform
        .nodes()
        .iter()
        .map(|n| {
            let history = sequence_node_of(preform, n).expect("node of the preform");
            (n.clone(), NodeValue::Seq(history))
        })
        .collect();
    let image: BTreeSet<&NodeValue> = map.values().collect();
    assert_eq!(
        image.len(),
        preform.nodes().len(),
        "distinct nodes share a choice history"
    );
    map
}

fn identity_choices(choices: &BTreeSet<Label>) -> BTreeMap<Label, Label> {
    choices.iter().map(|c| (c.clone(), c.clone())).collect()
}

/// Rewrites a preform so that each node becomes its own choice history. The
/// image is a choice-sequence preform and the returned morphism is an
/// isomorphism onto it; choices are untouched.
pub fn preform_to_choice_sequence(preform: &Preform) -> (Preform, PreformMorphism) {
    let (image, morphism) = transport_preform(
        preform,
        &history_bijection(preform),
        &identity_choices(preform.choices()),
    )
    .expect("history map is bijective");
    assert_eq!(
        is_choice_sequence_preform(&image),
        Ok(()),
        "history transport must land in the choice-sequence style"
    );
    (image, morphism)
}

/// Rewrites a form so that each node becomes its own choice history; players
/// and choices are untouched.
pub fn to_choice_sequence(form: &Form) -> (Form, IsoWitness) {
    let spec = TransportSpec {
        player_bij: form.players().map(|p| (p.clone(), p.clone())).collect(),
        node_bij: history_bijection(form.preform()),
        choice_bij: identity_choices(form.choices()),
    };
    let (image, witness) = transport_form(form, &spec).expect("history map is bijective");
    assert_eq!(
        is_choice_sequence_preform(image.preform()),
        Ok(()),
        "history transport must land in the choice-sequence style"
    );
    (image, witness)
}

/// Why a choice-set conversion was refused.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConversionError {
    #[error("NotChoiceSequence: {0}")]
    NotChoiceSequence(StyleViolation),
    /// Two nodes with the same range of choices; taking ranges would not be
    /// injective, which happens exactly on absentminded input.
    #[error("AbsentmindedInput: nodes {first} and {second} have the same choice range")]
    AbsentmindedInput { first: NodeValue, second: NodeValue },
}

fn range_bijection(preform: &Preform) -> Result<BTreeMap<NodeValue, NodeValue>, ConversionError> {
    is_choice_sequence_preform(preform).map_err(ConversionError::NotChoiceSequence)?;
    let mut seen: BTreeMap<BTreeSet<Label>, NodeValue> = BTreeMap::new();
    let mut map = BTreeMap::new();
    for node in preform.nodes() {
        let range = node.as_seq().expect("sequence style").range();
        if let Some(first) = seen.get(&range) {
            let collision = ConversionError::AbsentmindedInput {
                first: first.clone(),
                second: node.clone(),
            };
            assert!(
                !no_absentmindedness(preform).holds(),
                "range collision on a no-absentminded preform"
            );
            return Err(collision);
        }
        seen.insert(range.clone(), node.clone());
        map.insert(node.clone(), NodeValue::Set(SetNode::new(range)));
    }
    assert!(
        no_absentmindedness(preform).holds(),
        "injective ranges on an absentminded preform"
    );
    Ok(map)
}

/// Rewrites a no-absentminded choice-sequence preform so that each node
/// becomes the set of choices on its history.
pub fn preform_to_choice_set(
    preform: &Preform,
) -> Result<(Preform, PreformMorphism), ConversionError> {
    let node_bij = range_bijection(preform)?;
    let (image, morphism) =
        transport_preform(preform, &node_bij, &identity_choices(preform.choices()))
            .expect("range map is bijective");
    assert_eq!(
        is_choice_set_preform(&image),
        Ok(()),
        "range transport must land in the choice-set style"
    );
    Ok((image, morphism))
}

/// Rewrites a no-absentminded choice-sequence form so that each node becomes
/// the set of choices on its history; players and choices are untouched.
pub fn to_choice_set(form: &Form) -> Result<(Form, IsoWitness), ConversionError> {
    let node_bij = range_bijection(form.preform())?;
    let spec = TransportSpec {
        player_bij: form.players().map(|p| (p.clone(), p.clone())).collect(),
        node_bij,
        choice_bij: identity_choices(form.choices()),
    };
    let (image, witness) = transport_form(form, &spec).expect("range map is bijective");
    assert_eq!(
        is_choice_set_preform(image.preform()),
        Ok(()),
        "range transport must land in the choice-set style"
    );
    Ok((image, witness))
}

/// The two target styles of [`convert_form_to`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetStyle {
    ChoiceSequence,
    ChoiceSet,
}

/// Converts an arbitrary form into the requested style. The choice-set route
/// composes the history rewrite with the range rewrite and returns the
/// composed, revalidated witness.
pub fn convert_form_to(
    style: TargetStyle,
    form: &Form,
) -> Result<(Form, IsoWitness), ConversionError> {
    match style {
        TargetStyle::ChoiceSequence => Ok(to_choice_sequence(form)),
        TargetStyle::ChoiceSet => {
            let (mid, first) = to_choice_sequence(form);
            let (image, second) = to_choice_set(&mid)?;
            let witness = IsoWitness::compose(&second, &first)
                .expect("conversion witnesses compose");
            Ok((image, witness))
        }
    }
}
