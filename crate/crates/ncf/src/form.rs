//! Node-and-choice forms: a preform together with a player set and a
//! per-player partition of the choices, such that each node's feasible set
//! belongs to a single player.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::node::{Label, NodeValue};
use crate::preform::{Edge, InfoSet, Preform, PreformDerived, PreformError};

/// Why a candidate form is not a form.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("F1Violation: {0}")]
    F1(PreformError),
    #[error("F2Violation: players {player_a} and {player_b} both own choice {choice}")]
    F2 {
        player_a: Label,
        player_b: Label,
        choice: Label,
    },
    #[error("F3Violation: the feasible set at {node} is owned by no single player")]
    F3 { node: NodeValue },
}

impl FormError {
    pub fn axiom(&self) -> &'static str {
        match self {
            FormError::F1(_) => "F1",
            FormError::F2 { .. } => "F2",
            FormError::F3 { .. } => "F3",
        }
    }
}

/// Per-player entities determined by a form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormDerived {
    /// Decision nodes owned by each player; empty for vacuous players.
    pub player_nodes: BTreeMap<Label, BTreeSet<NodeValue>>,
    /// Information sets owned by each player.
    pub player_info_sets: BTreeMap<Label, BTreeSet<InfoSet>>,
}

/// A validated form. Immutable once built.
///
/// Players are the keys of the choice assignment; a player with an empty
/// choice set is vacuous and is kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Form {
    assignment: BTreeMap<Label, BTreeSet<Label>>,
    preform: Preform,
    choice_owner: BTreeMap<Label, Label>,
    derived: FormDerived,
}

impl Form {
    /// Checks the three form axioms, delegating the preform axioms to
    /// [`Preform::validate`] over the pooled choice set.
    pub fn validate(
        assignment: impl IntoIterator<Item = (Label, BTreeSet<Label>)>,
        nodes: impl IntoIterator<Item = NodeValue>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Form, FormError> {
        let assignment: BTreeMap<Label, BTreeSet<Label>> = assignment.into_iter().collect();

        // F2 first, so the pooled choice set is unambiguous.
        let mut choice_owner: BTreeMap<Label, Label> = BTreeMap::new();
        for (player, choices) in &assignment {
            for choice in choices {
                if let Some(prior) = choice_owner.insert(choice.clone(), player.clone()) {
                    return Err(FormError::F2 {
                        player_a: prior,
                        player_b: player.clone(),
                        choice: choice.clone(),
                    });
                }
            }
        }

        // F1: pooled choices form a preform.
        let pooled: BTreeSet<Label> = choice_owner.keys().cloned().collect();
        let preform = Preform::validate(nodes, pooled, edges).map_err(FormError::F1)?;

        // F3: each node's feasible set sits inside one player's choices.
        for node in preform.nodes() {
            let feasible = preform.feasible_at(node).expect("node of the preform");
            if feasible.is_empty() {
                continue;
            }
            let mut owners = feasible.iter().map(|c| &choice_owner[c]);
            let owner = owners.next().expect("nonempty feasible set");
            if owners.any(|other| other != owner) {
                return Err(FormError::F3 { node: node.clone() });
            }
        }

        let derived = derive(&assignment, &choice_owner, preform.derived());
        Ok(Form { assignment, preform, choice_owner, derived })
    }

    /// A preform regarded as a one-player form owning every choice.
    pub fn one_player(preform: &Preform) -> Form {
        let player = crate::node::label("1");
        Form::validate(
            [(player, preform.choices().clone())],
            preform.nodes().iter().cloned(),
            preform.edges().iter().cloned(),
        )
        .expect("a preform is a one-player form")
    }

    pub fn players(&self) -> impl Iterator<Item = &Label> {
        self.assignment.keys()
    }

    pub fn player_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn assignment(&self) -> &BTreeMap<Label, BTreeSet<Label>> {
        &self.assignment
    }

    pub fn choices_of(&self, player: &Label) -> Option<&BTreeSet<Label>> {
        self.assignment.get(player)
    }

    /// The player owning `choice`; total on the pooled choice set.
    pub fn owner_of(&self, choice: &Label) -> Option<&Label> {
        self.choice_owner.get(choice)
    }

    pub fn is_vacuous(&self, player: &Label) -> bool {
        self.assignment.get(player).is_some_and(BTreeSet::is_empty)
    }

    /// The underlying preform (players forgotten).
    pub fn preform(&self) -> &Preform {
        &self.preform
    }

    pub fn nodes(&self) -> &BTreeSet<NodeValue> {
        self.preform.nodes()
    }

    pub fn choices(&self) -> &BTreeSet<Label> {
        self.preform.choices()
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        self.preform.edges()
    }

    pub fn root(&self) -> &NodeValue {
        self.preform.root()
    }

    pub fn preform_derived(&self) -> &PreformDerived {
        self.preform.derived()
    }

    pub fn derived(&self) -> &FormDerived {
        &self.derived
    }
}

fn derive(
    assignment: &BTreeMap<Label, BTreeSet<Label>>,
    choice_owner: &BTreeMap<Label, Label>,
    preform: &PreformDerived,
) -> FormDerived {
    let mut player_nodes: BTreeMap<Label, BTreeSet<NodeValue>> = BTreeMap::new();
    let mut player_info_sets: BTreeMap<Label, BTreeSet<InfoSet>> = BTreeMap::new();
    for player in assignment.keys() {
        player_nodes.insert(player.clone(), BTreeSet::new());
        player_info_sets.insert(player.clone(), BTreeSet::new());
    }
    let mut preimage: BTreeMap<&Label, InfoSet> = BTreeMap::new();
    for (node, choice) in &preform.feasibility {
        preimage.entry(choice).or_default().insert(node.clone());
    }
    for (choice, set) in preimage {
        let owner = &choice_owner[choice];
        player_nodes.get_mut(owner).expect("known player").extend(set.iter().cloned());
        player_info_sets.get_mut(owner).expect("known player").insert(set);
    }

    let derived = FormDerived { player_nodes, player_info_sets };
    assert_partition_theorems(&derived, preform);
    derived
}

/// The per-player decompositions are theorems for any valid form; a failure
/// here is an internal bug, not bad input.
fn assert_partition_theorems(derived: &FormDerived, preform: &PreformDerived) {
    let mut union_nodes: BTreeSet<&NodeValue> = BTreeSet::new();
    let mut total = 0;
    for nodes in derived.player_nodes.values() {
        total += nodes.len();
        union_nodes.extend(nodes.iter());
    }
    assert_eq!(total, union_nodes.len(), "player decision-node sets overlap");
    assert_eq!(
        union_nodes,
        preform.decision_nodes.iter().collect(),
        "player decision-node sets miss the decision nodes"
    );

    let mut union_sets: BTreeSet<&InfoSet> = BTreeSet::new();
    let mut set_total = 0;
    for (player, sets) in &derived.player_info_sets {
        set_total += sets.len();
        union_sets.extend(sets.iter());
        let covered: BTreeSet<&NodeValue> = sets.iter().flatten().collect();
        assert_eq!(
            covered,
            derived.player_nodes[player].iter().collect(),
            "information sets of {player} do not partition that player's nodes"
        );
    }
    assert_eq!(set_total, union_sets.len(), "player information sets overlap");
    assert_eq!(
        union_sets,
        preform.info_sets.iter().collect(),
        "player information sets miss the information sets"
    );
}
