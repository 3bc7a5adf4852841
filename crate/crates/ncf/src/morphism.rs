//! Morphisms of preforms and forms, the category operations over them,
//! isomorphism decision and inversion, consequence reports, the forgetful
//! functor onto preforms, and subform inclusions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::form::Form;
use crate::node::{Label, NodeValue};
use crate::preform::{Edge, Preform, UnknownNode};

/// A structure-preserving pair of maps between preforms: nodes to nodes and
/// choices to choices, carrying every edge into a target edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreformMorphism {
    source: Preform,
    target: Preform,
    node_map: BTreeMap<NodeValue, NodeValue>,
    choice_map: BTreeMap<Label, Label>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PreformMorphismError {
    #[error("PM1Violation: {0}")]
    NodeMap(String),
    #[error("PM2Violation: {0}")]
    ChoiceMap(String),
    #[error("PM3Violation: image of edge {0} is not a target edge")]
    EdgeImage(Edge),
    #[error("source/target mismatch: the earlier morphism's target is not the later's source")]
    SourceTargetMismatch,
}

impl PreformMorphism {
    pub fn validate(
        source: Preform,
        target: Preform,
        node_map: BTreeMap<NodeValue, NodeValue>,
        choice_map: BTreeMap<Label, Label>,
    ) -> Result<Self, PreformMorphismError> {
        check_total("node map", source.nodes(), target.nodes(), &node_map)
            .map_err(PreformMorphismError::NodeMap)?;
        check_total("choice map", source.choices(), target.choices(), &choice_map)
            .map_err(PreformMorphismError::ChoiceMap)?;
        for edge in source.edges() {
            let image = Edge::new(
                node_map[&edge.source].clone(),
                choice_map[&edge.choice].clone(),
                node_map[&edge.result].clone(),
            );
            if !target.edges().contains(&image) {
                return Err(PreformMorphismError::EdgeImage(edge.clone()));
            }
        }
        Ok(PreformMorphism { source, target, node_map, choice_map })
    }

    pub fn identity(preform: &Preform) -> Self {
        PreformMorphism::validate(
            preform.clone(),
            preform.clone(),
            preform.nodes().iter().map(|n| (n.clone(), n.clone())).collect(),
            preform.choices().iter().map(|c| (c.clone(), c.clone())).collect(),
        )
        .expect("identity is a morphism")
    }

    pub fn compose(later: &Self, earlier: &Self) -> Result<Self, PreformMorphismError> {
        if earlier.target != later.source {
            return Err(PreformMorphismError::SourceTargetMismatch);
        }
        PreformMorphism::validate(
            earlier.source.clone(),
            later.target.clone(),
            compose_maps(&later.node_map, &earlier.node_map),
            compose_maps(&later.choice_map, &earlier.choice_map),
        )
    }

    pub fn is_isomorphism(&self) -> bool {
        is_bijection(&self.node_map, self.target.nodes())
            && is_bijection(&self.choice_map, self.target.choices())
    }

    pub fn source(&self) -> &Preform {
        &self.source
    }

    pub fn target(&self) -> &Preform {
        &self.target
    }

    pub fn node_map(&self) -> &BTreeMap<NodeValue, NodeValue> {
        &self.node_map
    }

    pub fn choice_map(&self) -> &BTreeMap<Label, Label> {
        &self.choice_map
    }
}

/// A form morphism: a preform morphism plus a player map under which each
/// player's choices land in the image player's choices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormMorphism {
    source: Form,
    target: Form,
    player_map: BTreeMap<Label, Label>,
    node_map: BTreeMap<NodeValue, NodeValue>,
    choice_map: BTreeMap<Label, Label>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormMorphismError {
    /// One of the five morphism conditions failed; `item` is its letter.
    #[error("FMViolation({item}): {detail}")]
    Violation { item: char, detail: String },
    #[error("source/target mismatch: the earlier morphism's target is not the later's source")]
    SourceTargetMismatch,
    #[error("not an isomorphism: {0}")]
    NotAnIsomorphism(String),
}

impl FormMorphism {
    /// Checks the five conditions characterizing a form morphism: (a) the
    /// player map is total into the target players, (b) the node map is total
    /// into the target nodes, (c) the choice map is total into the target
    /// choices, (d) each player's choices map into the image player's
    /// choices, and (e) each edge maps onto a target edge.
    pub fn validate(
        source: Form,
        target: Form,
        player_map: BTreeMap<Label, Label>,
        node_map: BTreeMap<NodeValue, NodeValue>,
        choice_map: BTreeMap<Label, Label>,
    ) -> Result<Self, FormMorphismError> {
        let violation = |item, detail: String| FormMorphismError::Violation { item, detail };
        let src_players: BTreeSet<Label> = source.players().cloned().collect();
        let trg_players: BTreeSet<Label> = target.players().cloned().collect();
        check_total("player map", &src_players, &trg_players, &player_map)
            .map_err(|d| violation('a', d))?;
        check_total("node map", source.nodes(), target.nodes(), &node_map)
            .map_err(|d| violation('b', d))?;
        check_total("choice map", source.choices(), target.choices(), &choice_map)
            .map_err(|d| violation('c', d))?;
        for (player, owned) in source.assignment() {
            let image_player = &player_map[player];
            let image_owned = target.choices_of(image_player).expect("target player");
            for choice in owned {
                if !image_owned.contains(&choice_map[choice]) {
                    return Err(violation(
                        'd',
                        format!(
                            "choice {choice} of player {player} maps to {}, which {image_player} does not own",
                            choice_map[choice]
                        ),
                    ));
                }
            }
        }
        for edge in source.edges() {
            let image = Edge::new(
                node_map[&edge.source].clone(),
                choice_map[&edge.choice].clone(),
                node_map[&edge.result].clone(),
            );
            if !target.edges().contains(&image) {
                return Err(violation(
                    'e',
                    format!("image triple {image} of {edge} is not a target edge"),
                ));
            }
        }
        Ok(FormMorphism { source, target, player_map, node_map, choice_map })
    }

    pub fn identity(form: &Form) -> Self {
        FormMorphism::validate(
            form.clone(),
            form.clone(),
            form.players().map(|p| (p.clone(), p.clone())).collect(),
            form.nodes().iter().map(|n| (n.clone(), n.clone())).collect(),
            form.choices().iter().map(|c| (c.clone(), c.clone())).collect(),
        )
        .expect("identity is a morphism")
    }

    /// Componentwise composition `later ∘ earlier`. Closure under composition
    /// is a theorem, so a validation failure of the composite is a bug.
    pub fn compose(later: &Self, earlier: &Self) -> Result<Self, FormMorphismError> {
        if earlier.target != later.source {
            return Err(FormMorphismError::SourceTargetMismatch);
        }
        let composed = FormMorphism::validate(
            earlier.source.clone(),
            later.target.clone(),
            compose_maps(&later.player_map, &earlier.player_map),
            compose_maps(&later.node_map, &earlier.node_map),
            compose_maps(&later.choice_map, &earlier.choice_map),
        );
        Ok(composed.expect("composition of morphisms is a morphism"))
    }

    /// True iff the player, node, and choice maps are each bijections.
    pub fn is_isomorphism(&self) -> bool {
        let trg_players: BTreeSet<Label> = self.target.players().cloned().collect();
        is_bijection(&self.player_map, &trg_players)
            && is_bijection(&self.node_map, self.target.nodes())
            && is_bijection(&self.choice_map, self.target.choices())
    }

    /// Inverts an isomorphism into a witness carrying both directions.
    pub fn invert(&self) -> Result<IsoWitness, FormMorphismError> {
        if !self.is_isomorphism() {
            return Err(FormMorphismError::NotAnIsomorphism(
                "a component map is not bijective".into(),
            ));
        }
        let inverse = FormMorphism::validate(
            self.target.clone(),
            self.source.clone(),
            invert_map(&self.player_map),
            invert_map(&self.node_map),
            invert_map(&self.choice_map),
        )
        .expect("the inverse of an isomorphism is a morphism");
        let witness = IsoWitness { forward: self.clone(), inverse };
        witness.assert_composites();
        Ok(witness)
    }

    pub fn source(&self) -> &Form {
        &self.source
    }

    pub fn target(&self) -> &Form {
        &self.target
    }

    pub fn player_map(&self) -> &BTreeMap<Label, Label> {
        &self.player_map
    }

    pub fn node_map(&self) -> &BTreeMap<NodeValue, NodeValue> {
        &self.node_map
    }

    pub fn choice_map(&self) -> &BTreeMap<Label, Label> {
        &self.choice_map
    }
}

/// An isomorphism together with its inverse; both compositions are checked
/// to equal the identities at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoWitness {
    forward: FormMorphism,
    inverse: FormMorphism,
}

impl IsoWitness {
    pub fn forward(&self) -> &FormMorphism {
        &self.forward
    }

    pub fn inverse(&self) -> &FormMorphism {
        &self.inverse
    }

    /// Composes two witnesses end to end.
    pub fn compose(later: &Self, earlier: &Self) -> Result<IsoWitness, FormMorphismError> {
        FormMorphism::compose(&later.forward, &earlier.forward)?.invert()
    }

    fn assert_composites(&self) {
        let back = FormMorphism::compose(&self.inverse, &self.forward)
            .expect("witness directions compose");
        assert_eq!(
            back,
            FormMorphism::identity(self.forward.source()),
            "inverse-after-forward is not the identity"
        );
        let forth = FormMorphism::compose(&self.forward, &self.inverse)
            .expect("witness directions compose");
        assert_eq!(
            forth,
            FormMorphism::identity(self.forward.target()),
            "forward-after-inverse is not the identity"
        );
    }
}

/// One checked consequence of a morphism or isomorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsequenceItem {
    /// The item's letter, or a name for the extra preimage-transport law.
    pub id: &'static str,
    pub description: &'static str,
    pub pass: bool,
    pub witness: Option<String>,
}

/// The ordered outcome of evaluating every consequence item. Every item must
/// pass for any valid input; a failure is reported rather than masked because
/// it signals an implementation bug.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsequenceReport {
    pub items: Vec<ConsequenceItem>,
}

impl ConsequenceReport {
    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConsequenceItem> {
        self.items.iter().filter(|i| !i.pass)
    }
}

impl fmt::Display for ConsequenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.items {
            let status = if item.pass { "pass" } else { "FAIL" };
            write!(f, "({}) {}: {}", item.id, status, item.description)?;
            if let Some(w) = &item.witness {
                write!(f, " [{w}]")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

struct ReportBuilder {
    items: Vec<ConsequenceItem>,
}

impl ReportBuilder {
    fn new() -> Self {
        ReportBuilder { items: Vec::new() }
    }

    fn check(&mut self, id: &'static str, description: &'static str, witness: Option<String>) {
        self.items.push(ConsequenceItem {
            id,
            description,
            pass: witness.is_none(),
            witness,
        });
    }
}

fn map_node(m: &BTreeMap<NodeValue, NodeValue>, n: &NodeValue) -> NodeValue {
    m[n].clone()
}

fn image_of_set(
    m: &BTreeMap<NodeValue, NodeValue>,
    set: &BTreeSet<NodeValue>,
) -> BTreeSet<NodeValue> {
    set.iter().map(|n| map_node(m, n)).collect()
}

/// Evaluates the thirteen consequences (f)–(r) that every form morphism must
/// satisfy: graph inclusions for feasibility, predecessor, previous-choice,
/// decision nodes, information sets, precedence, and chains, plus the root
/// and stage laws.
pub fn morphism_consequences(m: &FormMorphism) -> ConsequenceReport {
    let src = m.source();
    let trg = m.target();
    let sd = src.preform_derived();
    let td = trg.preform_derived();
    let tau = m.node_map();
    let delta = m.choice_map();
    let iota = m.player_map();
    let mut report = ReportBuilder::new();

    report.check(
        "f",
        "feasible pairs map into target feasible pairs",
        sd.feasibility.iter().find_map(|(t, c)| {
            let img = (map_node(tau, t), delta[c].clone());
            (!td.feasibility.contains(&img)).then(|| format!("({t}, {c})"))
        }),
    );
    report.check(
        "g",
        "the target root weakly precedes the image of the source root",
        {
            let img = map_node(tau, &sd.root);
            (!td.tree.weak_prec.contains(&(td.root.clone(), img.clone())))
                .then(|| format!("image root {img}"))
        },
    );
    report.check(
        "h",
        "predecessor pairs map into target predecessor pairs",
        sd.pred.iter().find_map(|(child, parent)| {
            let (ic, ip) = (map_node(tau, child), map_node(tau, parent));
            (td.pred.get(&ic) != Some(&ip)).then(|| format!("({child}, {parent})"))
        }),
    );
    report.check(
        "i",
        "previous-choice pairs map into target previous-choice pairs",
        sd.prev_choice.iter().find_map(|(child, choice)| {
            let (ic, id) = (map_node(tau, child), delta[choice].clone());
            (td.prev_choice.get(&ic) != Some(&id)).then(|| format!("({child}, {choice})"))
        }),
    );
    report.check(
        "j",
        "decision nodes map into target decision nodes",
        sd.decision_nodes.iter().find_map(|t| {
            let img = map_node(tau, t);
            (!td.decision_nodes.contains(&img)).then(|| t.to_string())
        }),
    );
    report.check(
        "k",
        "each player's decision nodes map into the image player's",
        src.derived().player_nodes.iter().find_map(|(player, nodes)| {
            let image_nodes = &trg.derived().player_nodes[&iota[player]];
            nodes.iter().find_map(|t| {
                let img = map_node(tau, t);
                (!image_nodes.contains(&img)).then(|| format!("player {player}, node {t}"))
            })
        }),
    );
    report.check(
        "l",
        "each information set maps into some target information set",
        sd.info_sets.iter().find_map(|set| {
            let img = image_of_set(tau, set);
            (!td.info_sets.iter().any(|t| img.is_subset(t)))
                .then(|| crate::node::fmt_nodes(set))
        }),
    );
    report.check(
        "m",
        "each player information set maps into an image-player information set",
        src.derived().player_info_sets.iter().find_map(|(player, sets)| {
            let image_sets = &trg.derived().player_info_sets[&iota[player]];
            sets.iter().find_map(|set| {
                let img = image_of_set(tau, set);
                (!image_sets.iter().any(|t| img.is_subset(t)))
                    .then(|| format!("player {player}: {}", crate::node::fmt_nodes(set)))
            })
        }),
    );
    let shift = td.tree.stage[&map_node(tau, &sd.root)];
    report.check(
        "n",
        "stages shift uniformly by the image root's stage",
        sd.tree.stage.iter().find_map(|(t, k)| {
            let img_k = td.tree.stage[&map_node(tau, t)];
            (img_k != k + shift).then(|| format!("{t}: {img_k} != {k} + {shift}"))
        }),
    );
    report.check(
        "o",
        "strict precedence maps into target strict precedence",
        sd.tree.strict_prec.iter().find_map(|(a, b)| {
            let img = (map_node(tau, a), map_node(tau, b));
            (!td.tree.strict_prec.contains(&img)).then(|| format!("({a}, {b})"))
        }),
    );
    report.check(
        "p",
        "weak precedence maps into target weak precedence",
        sd.tree.weak_prec.iter().find_map(|(a, b)| {
            let img = (map_node(tau, a), map_node(tau, b));
            (!td.tree.weak_prec.contains(&img)).then(|| format!("({a}, {b})"))
        }),
    );
    report.check(
        "q",
        "each finite maximal chain maps into a target maximal chain",
        sd.tree.chains_finite.iter().find_map(|chain| {
            let img = image_of_set(tau, chain);
            let covered = td
                .tree
                .chains_finite
                .iter()
                .chain(td.tree.chains_infinite.iter())
                .any(|z| img.is_subset(z));
            (!covered).then(|| crate::node::fmt_nodes(chain))
        }),
    );
    report.check(
        "r",
        "each infinite maximal chain maps into a target infinite chain",
        sd.tree.chains_infinite.iter().find_map(|chain| {
            let img = image_of_set(tau, chain);
            (!td.tree.chains_infinite.iter().any(|z| img.is_subset(z)))
                .then(|| crate::node::fmt_nodes(chain))
        }),
    );
    ConsequenceReport { items: report.items }
}

/// Checks that a restriction of a map is a bijection onto `expected`:
/// injective on its domain with image exactly `expected`.
fn restriction_bijects<B: Ord + Clone>(
    domain: impl Iterator<Item = B>,
    expected: &BTreeSet<B>,
) -> Option<String> {
    let mut image = BTreeSet::new();
    let mut count = 0usize;
    for img in domain {
        image.insert(img);
        count += 1;
    }
    if image.len() != count {
        return Some("restriction is not injective".to_string());
    }
    if &image != expected {
        return Some(format!(
            "image has {} elements, expected {}",
            image.len(),
            expected.len()
        ));
    }
    None
}

/// Evaluates the eighteen consequences (a)–(r) of a form isomorphism — every
/// component and derived entity restricts to a bijection, the roots
/// correspond, and stages are preserved — plus the preimage-transport law
/// `τ(F⁻¹(c)) = F′⁻¹(δ(c))`.
pub fn isomorphism_consequences(w: &IsoWitness) -> ConsequenceReport {
    let m = w.forward();
    let src = m.source();
    let trg = m.target();
    let sd = src.preform_derived();
    let td = trg.preform_derived();
    let tau = m.node_map();
    let delta = m.choice_map();
    let iota = m.player_map();
    let mut report = ReportBuilder::new();

    let trg_players: BTreeSet<Label> = trg.players().cloned().collect();
    report.check(
        "a",
        "the player map is a bijection",
        restriction_bijects(iota.values().cloned(), &trg_players),
    );
    report.check(
        "b",
        "the node map is a bijection",
        restriction_bijects(tau.values().cloned(), trg.nodes()),
    );
    report.check(
        "c",
        "the choice map is a bijection",
        restriction_bijects(delta.values().cloned(), trg.choices()),
    );
    report.check(
        "d",
        "each player's choices biject onto the image player's choices",
        src.assignment().iter().find_map(|(player, owned)| {
            let expected = trg.choices_of(&iota[player]).expect("target player");
            restriction_bijects(
                owned.iter().map(|c| delta[c].clone()),
                expected,
            )
            .map(|d| format!("player {player}: {d}"))
        }),
    );
    report.check(
        "e",
        "edge triples biject onto the target edges",
        restriction_bijects(
            src.edges().iter().map(|e| {
                Edge::new(
                    map_node(tau, &e.source),
                    delta[&e.choice].clone(),
                    map_node(tau, &e.result),
                )
            }),
            trg.edges(),
        ),
    );
    report.check(
        "f",
        "feasible pairs biject onto the target feasible pairs",
        restriction_bijects(
            sd.feasibility
                .iter()
                .map(|(t, c)| (map_node(tau, t), delta[c].clone())),
            &td.feasibility,
        ),
    );
    report.check("g", "the roots correspond", {
        let img = map_node(tau, &sd.root);
        (img != td.root).then(|| format!("image root {img} != {}", td.root))
    });
    report.check(
        "h",
        "predecessor graphs correspond",
        restriction_bijects(
            sd.pred
                .iter()
                .map(|(c, p)| (map_node(tau, c), map_node(tau, p))),
            &td.pred.iter().map(|(c, p)| (c.clone(), p.clone())).collect(),
        ),
    );
    report.check(
        "i",
        "previous-choice graphs correspond",
        restriction_bijects(
            sd.prev_choice
                .iter()
                .map(|(t, c)| (map_node(tau, t), delta[c].clone())),
            &td.prev_choice.iter().map(|(t, c)| (t.clone(), c.clone())).collect(),
        ),
    );
    report.check(
        "j",
        "decision nodes correspond",
        restriction_bijects(
            sd.decision_nodes.iter().map(|t| map_node(tau, t)),
            &td.decision_nodes,
        ),
    );
    report.check(
        "k",
        "each player's decision nodes correspond",
        src.derived().player_nodes.iter().find_map(|(player, nodes)| {
            restriction_bijects(
                nodes.iter().map(|t| map_node(tau, t)),
                &trg.derived().player_nodes[&iota[player]],
            )
            .map(|d| format!("player {player}: {d}"))
        }),
    );
    report.check(
        "l",
        "information sets correspond",
        restriction_bijects(
            sd.info_sets.iter().map(|s| image_of_set(tau, s)),
            &td.info_sets,
        ),
    );
    report.check(
        "m",
        "each player's information sets correspond",
        src.derived().player_info_sets.iter().find_map(|(player, sets)| {
            restriction_bijects(
                sets.iter().map(|s| image_of_set(tau, s)),
                &trg.derived().player_info_sets[&iota[player]],
            )
            .map(|d| format!("player {player}: {d}"))
        }),
    );
    report.check(
        "n",
        "stages are preserved",
        sd.tree.stage.iter().find_map(|(t, k)| {
            let img_k = td.tree.stage[&map_node(tau, t)];
            (img_k != *k).then(|| format!("{t}: {img_k} != {k}"))
        }),
    );
    report.check(
        "o",
        "strict precedence corresponds",
        restriction_bijects(
            sd.tree
                .strict_prec
                .iter()
                .map(|(a, b)| (map_node(tau, a), map_node(tau, b))),
            &td.tree.strict_prec,
        ),
    );
    report.check(
        "p",
        "weak precedence corresponds",
        restriction_bijects(
            sd.tree
                .weak_prec
                .iter()
                .map(|(a, b)| (map_node(tau, a), map_node(tau, b))),
            &td.tree.weak_prec,
        ),
    );
    report.check(
        "q",
        "finite maximal chains correspond",
        restriction_bijects(
            sd.tree.chains_finite.iter().map(|z| image_of_set(tau, z)),
            &td.tree.chains_finite,
        ),
    );
    report.check(
        "r",
        "infinite maximal chains correspond",
        restriction_bijects(
            sd.tree.chains_infinite.iter().map(|z| image_of_set(tau, z)),
            &td.tree.chains_infinite,
        ),
    );
    report.check(
        "preimage",
        "choice preimages transport across the bijections",
        src.choices().iter().find_map(|c| {
            let src_pre: BTreeSet<NodeValue> = sd
                .feasibility
                .iter()
                .filter(|(_, fc)| fc == c)
                .map(|(t, _)| map_node(tau, t))
                .collect();
            let img_choice = &delta[c];
            let trg_pre: BTreeSet<NodeValue> = td
                .feasibility
                .iter()
                .filter(|(_, fc)| fc == img_choice)
                .map(|(t, _)| t.clone())
                .collect();
            (src_pre != trg_pre).then(|| format!("choice {c}"))
        }),
    );
    ConsequenceReport { items: report.items }
}

/// The object part of the forgetful functor: drop the players.
pub fn forget_players(form: &Form) -> Preform {
    form.preform().clone()
}

/// The morphism part of the forgetful functor: drop the player map.
pub fn forget_morphism(m: &FormMorphism) -> PreformMorphism {
    PreformMorphism::validate(
        m.source().preform().clone(),
        m.target().preform().clone(),
        m.node_map().clone(),
        m.choice_map().clone(),
    )
    .expect("a form morphism forgets to a preform morphism")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubformError {
    #[error(transparent)]
    UnknownNode(#[from] UnknownNode),
    #[error("DegenerateSubform: {0} is terminal, so the restriction has a single node")]
    Degenerate(NodeValue),
}

/// Restricts a form to a node and its descendants, returning the subform and
/// its inclusion morphism. All players are kept (possibly vacuous); the
/// inclusion is an isomorphism exactly when `at` is the root.
pub fn subform_at(form: &Form, at: &NodeValue) -> Result<(Form, FormMorphism), SubformError> {
    if !form.nodes().contains(at) {
        return Err(UnknownNode(at.clone()).into());
    }
    let descendants: BTreeSet<NodeValue> = form
        .preform_derived()
        .tree
        .weak_prec
        .iter()
        .filter(|(a, _)| a == at)
        .map(|(_, b)| b.clone())
        .collect();
    if descendants.len() < 2 {
        return Err(SubformError::Degenerate(at.clone()));
    }
    let edges: BTreeSet<Edge> = form
        .edges()
        .iter()
        .filter(|e| descendants.contains(&e.source))
        .cloned()
        .collect();
    let kept: BTreeSet<Label> = edges.iter().map(|e| e.choice.clone()).collect();
    let assignment: BTreeMap<Label, BTreeSet<Label>> = form
        .assignment()
        .iter()
        .map(|(p, owned)| (p.clone(), owned.intersection(&kept).cloned().collect()))
        .collect();
    let sub = Form::validate(assignment, descendants.iter().cloned(), edges)
        .expect("a subtree restriction of a form is a form");
    let inclusion = FormMorphism::validate(
        sub.clone(),
        form.clone(),
        form.players().map(|p| (p.clone(), p.clone())).collect(),
        descendants.iter().map(|n| (n.clone(), n.clone())).collect(),
        kept.iter().map(|c| (c.clone(), c.clone())).collect(),
    )
    .expect("a subform inclusion is a morphism");
    Ok((sub, inclusion))
}

/// The isomorphism-invariant fingerprint used to prune search and to group
/// enumeration universes: component counts plus the stage profile with
/// per-stage out-degree multisets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FormSignature {
    pub node_count: usize,
    pub choice_count: usize,
    pub player_count: usize,
    pub vacuous_players: usize,
    /// For each stage: (stage, sorted out-degrees of its nodes).
    pub stage_degrees: Vec<(usize, Vec<usize>)>,
}

impl fmt::Display for FormSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "|T|={} |C|={} |I|={} vacuous={} stages={:?}",
            self.node_count,
            self.choice_count,
            self.player_count,
            self.vacuous_players,
            self.stage_degrees
        )
    }
}

pub fn signature(form: &Form) -> FormSignature {
    let derived = form.preform_derived();
    let mut outdeg: BTreeMap<&NodeValue, usize> = BTreeMap::new();
    for edge in form.edges() {
        *outdeg.entry(&edge.source).or_insert(0) += 1;
    }
    let mut by_stage: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (node, stage) in &derived.tree.stage {
        by_stage
            .entry(*stage)
            .or_default()
            .push(outdeg.get(node).copied().unwrap_or(0));
    }
    for degrees in by_stage.values_mut() {
        degrees.sort_unstable();
    }
    FormSignature {
        node_count: form.nodes().len(),
        choice_count: form.choices().len(),
        player_count: form.player_count(),
        vacuous_players: form.players().filter(|p| form.is_vacuous(p)).count(),
        stage_degrees: by_stage.into_iter().collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExhaustionReason {
    /// The invariant fingerprints differ, so no bijection can exist.
    SignatureMismatch(String),
    /// Every stage-respecting, predecessor-compatible assignment was tried.
    SearchExhausted,
}

/// A replayable record that the isomorphism search came up empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExhaustivenessCertificate {
    pub reason: ExhaustionReason,
    pub signature: String,
    pub assignments_explored: u64,
}

impl fmt::Display for ExhaustivenessCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.reason {
            ExhaustionReason::SignatureMismatch(d) => {
                write!(f, "signature mismatch ({d}); class {}", self.signature)
            }
            ExhaustionReason::SearchExhausted => write!(
                f,
                "search exhausted after {} node assignments; class {}",
                self.assignments_explored, self.signature
            ),
        }
    }
}

struct IsoSearch<'a> {
    source: &'a Form,
    target: &'a Form,
    order: Vec<&'a NodeValue>,
    target_children: BTreeMap<&'a NodeValue, Vec<&'a NodeValue>>,
    subtree_size: BTreeMap<&'a NodeValue, usize>,
    target_subtree_size: BTreeMap<&'a NodeValue, usize>,
    outdeg: BTreeMap<&'a NodeValue, usize>,
    target_outdeg: BTreeMap<&'a NodeValue, usize>,
    explored: u64,
}

/// Finds a form isomorphism if one exists; otherwise proves exhaustively that
/// none does. The node map is built root-first in canonical order, restricted
/// to stage-preserving, predecessor-respecting assignments; the choice map is
/// forced along by the previous-choice functions, and the player map is
/// forced on nonvacuous players by choice ownership (vacuous players are
/// matched in label order). The first witness in canonical branch order is
/// returned, so the result is deterministic.
pub fn find_isomorphism(
    source: &Form,
    target: &Form,
) -> Result<IsoWitness, ExhaustivenessCertificate> {
    let src_sig = signature(source);
    let trg_sig = signature(target);
    if src_sig != trg_sig {
        return Err(ExhaustivenessCertificate {
            reason: ExhaustionReason::SignatureMismatch(format!("{src_sig} vs {trg_sig}")),
            signature: src_sig.to_string(),
            assignments_explored: 0,
        });
    }

    let mut order: Vec<&NodeValue> = source.nodes().iter().collect();
    let src_stage = &source.preform_derived().tree.stage;
    order.sort_by_key(|n| (src_stage[*n], (*n).clone()));

    let mut target_children: BTreeMap<&NodeValue, Vec<&NodeValue>> = BTreeMap::new();
    for (child, parent) in &target.preform_derived().pred {
        target_children.entry(parent).or_default().push(child);
    }

    let mut search = IsoSearch {
        source,
        target,
        order,
        target_children,
        subtree_size: subtree_sizes(source),
        target_subtree_size: subtree_sizes(target),
        outdeg: out_degrees(source),
        target_outdeg: out_degrees(target),
        explored: 0,
    };
    let mut node_map: BTreeMap<NodeValue, NodeValue> = BTreeMap::new();
    let mut choice_map: BTreeMap<Label, Label> = BTreeMap::new();
    let mut choice_inv: BTreeMap<Label, Label> = BTreeMap::new();
    let mut used: BTreeSet<&NodeValue> = BTreeSet::new();
    match search.assign(0, &mut node_map, &mut choice_map, &mut choice_inv, &mut used) {
        Some(witness) => Ok(witness),
        None => Err(ExhaustivenessCertificate {
            reason: ExhaustionReason::SearchExhausted,
            signature: src_sig.to_string(),
            assignments_explored: search.explored,
        }),
    }
}

fn subtree_sizes(form: &Form) -> BTreeMap<&NodeValue, usize> {
    let mut sizes: BTreeMap<&NodeValue, usize> = form.nodes().iter().map(|n| (n, 1)).collect();
    let mut order: Vec<&NodeValue> = form.nodes().iter().collect();
    let stage = &form.preform_derived().tree.stage;
    order.sort_by_key(|n| std::cmp::Reverse(stage[*n]));
    for node in order {
        if let Some(parent) = form.preform_derived().pred.get(node) {
            let add = sizes[node];
            *sizes.get_mut(parent).expect("parent is a node") += add;
        }
    }
    sizes
}

fn out_degrees(form: &Form) -> BTreeMap<&NodeValue, usize> {
    let mut outdeg: BTreeMap<&NodeValue, usize> = form.nodes().iter().map(|n| (n, 0)).collect();
    for edge in form.edges() {
        *outdeg.get_mut(&edge.source).expect("source is a node") += 1;
    }
    outdeg
}

impl<'a> IsoSearch<'a> {
    fn assign(
        &mut self,
        index: usize,
        node_map: &mut BTreeMap<NodeValue, NodeValue>,
        choice_map: &mut BTreeMap<Label, Label>,
        choice_inv: &mut BTreeMap<Label, Label>,
        used: &mut BTreeSet<&'a NodeValue>,
    ) -> Option<IsoWitness> {
        let Some(&node) = self.order.get(index) else {
            return self.finish(node_map, choice_map);
        };
        let sd = self.source.preform_derived();
        let candidates: Vec<&NodeValue> = match sd.pred.get(node) {
            None => vec![self.target.root()],
            Some(parent) => {
                let image_parent = &node_map[parent];
                self.target_children
                    .get(image_parent)
                    .map(|children| children.to_vec())
                    .unwrap_or_default()
            }
        };
        for candidate in candidates {
            if used.contains(candidate)
                || self.outdeg[node] != self.target_outdeg[candidate]
                || self.subtree_size[node] != self.target_subtree_size[candidate]
            {
                continue;
            }
            // The previous-choice functions force the choice map along τ.
            let forced = sd.prev_choice.get(node).map(|c| {
                (c, &self.target.preform_derived().prev_choice[candidate])
            });
            let mut inserted_choice = false;
            if let Some((c, c_img)) = forced {
                match (choice_map.get(c), choice_inv.get(c_img)) {
                    (Some(existing), _) if existing != c_img => continue,
                    (None, Some(back)) if back != c => continue,
                    (None, None) => {
                        choice_map.insert(c.clone(), c_img.clone());
                        choice_inv.insert(c_img.clone(), c.clone());
                        inserted_choice = true;
                    }
                    _ => {}
                }
            }
            self.explored += 1;
            node_map.insert(node.clone(), candidate.clone());
            used.insert(candidate);
            if let Some(witness) =
                self.assign(index + 1, node_map, choice_map, choice_inv, used)
            {
                return Some(witness);
            }
            used.remove(candidate);
            node_map.remove(node);
            if inserted_choice {
                let (c, c_img) = forced.expect("inserted implies forced");
                choice_map.remove(c);
                choice_inv.remove(c_img);
            }
        }
        None
    }

    fn finish(
        &self,
        node_map: &BTreeMap<NodeValue, NodeValue>,
        choice_map: &BTreeMap<Label, Label>,
    ) -> Option<IsoWitness> {
        // Every choice occurs as some node's previous choice, so the forced
        // choice map is already total.
        debug_assert_eq!(choice_map.len(), self.source.choices().len());

        let mut player_map: BTreeMap<Label, Label> = BTreeMap::new();
        for (player, owned) in self.source.assignment() {
            let Some(first) = owned.iter().next() else { continue };
            let image_player = self.target.owner_of(&choice_map[first])?.clone();
            if owned.iter().any(|c| {
                self.target.owner_of(&choice_map[c]) != Some(&image_player)
            }) {
                return None;
            }
            player_map.insert(player.clone(), image_player);
        }
        let vac_src: Vec<&Label> =
            self.source.players().filter(|p| self.source.is_vacuous(p)).collect();
        let vac_trg: Vec<&Label> =
            self.target.players().filter(|p| self.target.is_vacuous(p)).collect();
        if vac_src.len() != vac_trg.len() {
            return None;
        }
        for (s, t) in vac_src.into_iter().zip(vac_trg) {
            player_map.insert(s.clone(), t.clone());
        }

        let morphism = FormMorphism::validate(
            self.source.clone(),
            self.target.clone(),
            player_map,
            node_map.clone(),
            choice_map.clone(),
        )
        .ok()?;
        if !morphism.is_isomorphism() {
            return None;
        }
        Some(morphism.invert().expect("bijective morphism inverts"))
    }
}

fn check_total<K: Ord + fmt::Display, V: Ord + fmt::Display>(
    what: &str,
    domain: &BTreeSet<K>,
    codomain: &BTreeSet<V>,
    map: &BTreeMap<K, V>,
) -> Result<(), String> {
    for key in domain {
        match map.get(key) {
            None => return Err(format!("{what} is undefined at {key}")),
            Some(value) if !codomain.contains(value) => {
                return Err(format!("{what} sends {key} to {value}, outside the target"))
            }
            _ => {}
        }
    }
    if let Some(extra) = map.keys().find(|k| !domain.contains(k)) {
        return Err(format!("{what} has an entry for {extra}, which is not in the source"));
    }
    Ok(())
}

fn is_bijection<K: Ord, V: Ord + Clone>(map: &BTreeMap<K, V>, codomain: &BTreeSet<V>) -> bool {
    let image: BTreeSet<V> = map.values().cloned().collect();
    image.len() == map.len() && image == *codomain
}

fn compose_maps<K: Ord + Clone, V: Ord + Clone>(
    later: &BTreeMap<V, V>,
    earlier: &BTreeMap<K, V>,
) -> BTreeMap<K, V> {
    earlier
        .iter()
        .map(|(k, mid)| (k.clone(), later[mid].clone()))
        .collect()
}

fn invert_map<K: Ord + Clone>(map: &BTreeMap<K, K>) -> BTreeMap<K, K> {
    map.iter().map(|(k, v)| (v.clone(), k.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::fixtures::{absentminded_form, simultaneous_form};
    use crate::node::{label, NodeValue as N};

    fn seq(items: &[&str]) -> NodeValue {
        N::seq(items.iter().copied())
    }

    #[test]
    fn identity_validates_and_is_iso() {
        for form in [absentminded_form(), simultaneous_form()] {
            let id = FormMorphism::identity(&form);
            assert!(id.is_isomorphism());
            let witness = id.invert().expect("identity inverts");
            assert_eq!(witness.inverse(), &id);
        }
    }

    #[test]
    fn pm3_break_is_item_e() {
        let f = simultaneous_form();
        // Swap the two leaves under [a]; edge images then miss the target.
        let mut tau: BTreeMap<NodeValue, NodeValue> =
            f.nodes().iter().map(|n| (n.clone(), n.clone())).collect();
        tau.insert(seq(&["a", "c"]), seq(&["b", "d"]));
        tau.insert(seq(&["b", "d"]), seq(&["a", "c"]));
        let err = FormMorphism::validate(
            f.clone(),
            f.clone(),
            f.players().map(|p| (p.clone(), p.clone())).collect(),
            tau,
            f.choices().iter().map(|c| (c.clone(), c.clone())).collect(),
        )
        .unwrap_err();
        assert!(matches!(err, FormMorphismError::Violation { item: 'e', .. }));
    }

    #[test]
    fn unit_laws() {
        let f = simultaneous_form();
        let id = FormMorphism::identity(&f);
        let composed = FormMorphism::compose(&id, &id).expect("composable");
        assert_eq!(composed, id);
    }

    #[test]
    fn mismatched_composition_is_rejected() {
        let id_a = FormMorphism::identity(&simultaneous_form());
        let id_b = FormMorphism::identity(&absentminded_form());
        assert_eq!(
            FormMorphism::compose(&id_a, &id_b).unwrap_err(),
            FormMorphismError::SourceTargetMismatch
        );
    }

    #[test]
    fn subform_inclusion_is_a_non_iso_morphism() {
        let f = simultaneous_form();
        let (sub, inclusion) = subform_at(&f, &seq(&["a"])).expect("subform");
        assert_eq!(sub.nodes().len(), 3);
        assert!(sub.is_vacuous(&label("1")));
        assert_eq!(
            sub.choices_of(&label("2")).unwrap(),
            &[label("c"), label("d")].into()
        );
        assert!(!inclusion.is_isomorphism());
        assert!(inclusion.invert().is_err());
        assert!(morphism_consequences(&inclusion).all_pass());
    }

    #[test]
    fn subform_at_root_is_identity() {
        let f = simultaneous_form();
        let (_, inclusion) = subform_at(&f, &seq(&[])).expect("whole form");
        assert_eq!(inclusion, FormMorphism::identity(&f));
    }

    #[test]
    fn subform_at_terminal_is_degenerate() {
        let f = simultaneous_form();
        assert!(matches!(
            subform_at(&f, &seq(&["a", "c"])),
            Err(SubformError::Degenerate(_))
        ));
        assert!(matches!(
            subform_at(&f, &N::atom("zz")),
            Err(SubformError::UnknownNode(_))
        ));
    }

    #[test]
    fn identity_consequences_all_pass() {
        let f = simultaneous_form();
        let id = FormMorphism::identity(&f);
        assert!(morphism_consequences(&id).all_pass());
        let witness = id.invert().unwrap();
        let report = isomorphism_consequences(&witness);
        assert!(report.all_pass(), "{report}");
        assert_eq!(report.items.len(), 19);
    }

    #[test]
    fn strict_root_drop_in_item_g() {
        let f = simultaneous_form();
        let (_, inclusion) = subform_at(&f, &seq(&["a"])).expect("subform");
        let report = morphism_consequences(&inclusion);
        assert!(report.all_pass(), "{report}");
        // The image of the subform root sits strictly below the target root.
        let tau_root = &inclusion.node_map()[inclusion.source().root()];
        assert!(f
            .preform_derived()
            .tree
            .strict_prec
            .contains(&(f.root().clone(), tau_root.clone())));
    }

    #[test]
    fn forgetting_preserves_identity() {
        let f = simultaneous_form();
        let id = FormMorphism::identity(&f);
        assert_eq!(
            forget_morphism(&id),
            PreformMorphism::identity(f.preform())
        );
        assert_eq!(&forget_players(&f), f.preform());
    }

    #[test]
    fn self_isomorphism_is_found() {
        for form in [absentminded_form(), simultaneous_form()] {
            let witness = find_isomorphism(&form, &form).expect("iso with itself");
            assert!(witness.forward().is_isomorphism());
        }
    }

    #[test]
    fn size_mismatch_short_circuits() {
        let err = find_isomorphism(&simultaneous_form(), &absentminded_form()).unwrap_err();
        assert!(matches!(err.reason, ExhaustionReason::SignatureMismatch(_)));
    }
}
