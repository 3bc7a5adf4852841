//! Exhaustive enumeration of trees, preforms, and forms up to isomorphism at
//! small node counts, and machine verification of enclosure, equivalence,
//! and strictness claims between the style/property subcategories over those
//! universes.
//!
//! Enumeration is canonical-representative based. Tree shapes are generated
//! as sorted multisets of child shapes, so distinct shapes are never
//! isomorphic. Choice labelings of a tree are generated from partitions of
//! the decision nodes into equal-out-degree blocks (one choice set per
//! block), and forms add a partition of the blocks among players. Each
//! generated object is reduced to a canonical key — the least relabeled edge
//! list over all stage-respecting node relabelings, with choices renamed by
//! first use and player classes numbered by first appearance — and one
//! object per key survives. Two objects are isomorphic exactly when their
//! keys agree, because an isomorphism preserves stages and every relabeling
//! of one object is a relabeling of the other.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::form::Form;
use crate::formio;
use crate::morphism::{find_isomorphism, isomorphism_consequences, signature};
use crate::node::{label, Label, NodeValue};
use crate::preform::{Edge, Preform};
use crate::properties::{no_absentmindedness, perfect_information};
use crate::styles::{is_choice_sequence_preform, is_choice_set_preform};
use crate::transport::{preform_to_choice_sequence, preform_to_choice_set, to_choice_sequence, to_choice_set};
use crate::tree::Tree;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("BoundTooSmall: {what} bound must be at least {min}, got {got}")]
    BoundTooSmall { what: &'static str, min: usize, got: usize },
    #[error("LevelMismatch: {0} and {1} live at different object levels")]
    LevelMismatch(SubcategoryId, SubcategoryId),
}

/// Whether a subcategory collects forms or preforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Form,
    Preform,
}

/// The node-style restriction of a subcategory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Style {
    Any,
    ChoiceSequence,
    ChoiceSet,
}

/// The property restriction of a subcategory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PropertyFilter {
    Any,
    NoAbsentmindedness,
    PerfectInformation,
}

/// One of the named full subcategories: a level, a style, and a property.
/// Membership is decided per object; morphisms are not enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubcategoryId {
    pub level: Level,
    pub style: Style,
    pub property: PropertyFilter,
}

impl SubcategoryId {
    pub const fn new(level: Level, style: Style, property: PropertyFilter) -> Self {
        SubcategoryId { level, style, property }
    }

    fn style_ok(&self, pf: &Preform) -> bool {
        match self.style {
            Style::Any => true,
            Style::ChoiceSequence => is_choice_sequence_preform(pf).is_ok(),
            Style::ChoiceSet => is_choice_set_preform(pf).is_ok(),
        }
    }

    fn property_ok(&self, pf: &Preform) -> bool {
        match self.property {
            PropertyFilter::Any => true,
            PropertyFilter::NoAbsentmindedness => no_absentmindedness(pf).holds(),
            PropertyFilter::PerfectInformation => perfect_information(pf).holds(),
        }
    }

    /// Membership of an object at this subcategory's level.
    pub fn contains(&self, object: &UniverseObject) -> bool {
        let pf = match (self.level, object) {
            (Level::Form, UniverseObject::Form(f)) => f.preform(),
            (Level::Preform, UniverseObject::Preform(p)) => p,
            _ => return false,
        };
        self.style_ok(pf) && self.property_ok(pf)
    }
}

impl fmt::Display for SubcategoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match (self.style, self.level) {
            (Style::Any, Level::Form) => "NCF",
            (Style::Any, Level::Preform) => "NCP",
            (Style::ChoiceSequence, Level::Form) => "CsqF",
            (Style::ChoiceSequence, Level::Preform) => "CsqP",
            (Style::ChoiceSet, Level::Form) => "CsetF",
            (Style::ChoiceSet, Level::Preform) => "CsetP",
        };
        let suffix = match self.property {
            PropertyFilter::Any => "",
            PropertyFilter::NoAbsentmindedness => "_noabs",
            PropertyFilter::PerfectInformation => "_perfinfo",
        };
        write!(f, "{base}{suffix}")
    }
}

impl FromStr for SubcategoryId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (base, property) = if let Some(base) = s.strip_suffix("_noabs") {
            (base, PropertyFilter::NoAbsentmindedness)
        } else if let Some(base) = s.strip_suffix("_perfinfo") {
            (base, PropertyFilter::PerfectInformation)
        } else {
            (s, PropertyFilter::Any)
        };
        let (style, level) = match base {
            "NCF" => (Style::Any, Level::Form),
            "NCP" => (Style::Any, Level::Preform),
            "CsqF" => (Style::ChoiceSequence, Level::Form),
            "CsqP" => (Style::ChoiceSequence, Level::Preform),
            "CsetF" => (Style::ChoiceSet, Level::Form),
            "CsetP" => (Style::ChoiceSet, Level::Preform),
            other => return Err(format!("unknown subcategory {other:?}")),
        };
        if style == Style::ChoiceSet && property == PropertyFilter::NoAbsentmindedness {
            return Err(format!(
                "{s} is not a named subcategory: choice-set objects always have no-absentmindedness"
            ));
        }
        Ok(SubcategoryId { level, style, property })
    }
}

/// An element of an enumeration universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UniverseObject {
    Form(Form),
    Preform(Preform),
}

impl UniverseObject {
    pub fn serialize(&self) -> String {
        match self {
            UniverseObject::Form(f) => formio::serialize_form(f),
            UniverseObject::Preform(p) => formio::serialize_preform(p),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            UniverseObject::Form(f) => f.nodes().len(),
            UniverseObject::Preform(p) => p.nodes().len(),
        }
    }

    /// The form searched when deciding isomorphism; a preform is searched as
    /// its one-player form, which is isomorphic-over-forms exactly when the
    /// preforms are isomorphic.
    fn search_form(&self) -> Form {
        match self {
            UniverseObject::Form(f) => f.clone(),
            UniverseObject::Preform(p) => Form::one_player(p),
        }
    }
}

// ---------------------------------------------------------------------------
// Tree shapes

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Shape {
    size: usize,
    children: Vec<Shape>,
}

fn leaf() -> Shape {
    Shape { size: 1, children: Vec::new() }
}

/// All rooted tree shapes with 1..=max nodes, indexed by size. A shape is a
/// nonincreasing multiset of child shapes, so each isomorphism class appears
/// exactly once.
fn shapes_by_size(max: usize) -> Vec<Vec<Shape>> {
    let mut by_size: Vec<Vec<Shape>> = vec![Vec::new(); max + 1];
    if max >= 1 {
        by_size[1] = vec![leaf()];
    }
    for size in 2..=max {
        let mut shapes = Vec::new();
        let smaller = by_size[..size].to_vec();
        collect_children(size - 1, None, &smaller, &mut Vec::new(), &mut |children| {
            shapes.push(Shape { size, children: children.to_vec() });
        });
        by_size[size] = shapes;
    }
    by_size
}

fn collect_children(
    remaining: usize,
    bound: Option<&Shape>,
    by_size: &[Vec<Shape>],
    current: &mut Vec<Shape>,
    emit: &mut impl FnMut(&[Shape]),
) {
    if remaining == 0 {
        emit(current);
        return;
    }
    for size in (1..=remaining).rev() {
        for candidate in by_size[size].iter().rev() {
            if let Some(b) = bound {
                if candidate > b {
                    continue;
                }
            }
            current.push(candidate.clone());
            collect_children(remaining - size, Some(candidate), by_size, current, emit);
            current.pop();
        }
    }
}

/// Realizes a shape as a tree on atom nodes labeled in breadth-first order.
fn tree_from_shape(shape: &Shape) -> Tree {
    let mut nodes = Vec::new();
    let mut pred = Vec::new();
    let mut queue: Vec<(&Shape, usize)> = Vec::new();
    let node = |i: usize| NodeValue::Atom(label(&format!("n{i}")));
    nodes.push(node(0));
    queue.push((shape, 0));
    let mut next = 1;
    let mut head = 0;
    while head < queue.len() {
        let (sh, idx) = queue[head];
        head += 1;
        for child in &sh.children {
            nodes.push(node(next));
            pred.push((node(next), node(idx)));
            queue.push((child, next));
            next += 1;
        }
    }
    Tree::validate(nodes, pred).expect("a shape realizes a tree")
}

/// All functioned trees with 2..=max nodes, one per isomorphism class, with
/// atom node labels assigned in breadth-first canonical order.
pub fn enumerate_trees(max_nodes: usize) -> Result<Vec<Tree>, OracleError> {
    if max_nodes < 2 {
        return Err(OracleError::BoundTooSmall { what: "node", min: 2, got: max_nodes });
    }
    let by_size = shapes_by_size(max_nodes);
    Ok(by_size[2..]
        .iter()
        .flat_map(|shapes| shapes.iter().map(tree_from_shape))
        .collect())
}

// ---------------------------------------------------------------------------
// Canonical keys

/// The canonical fingerprint of a labeled object: for each non-root node
/// index (in order) the producing (source index, choice number), plus the
/// player class of each choice number for forms.
type CanonKey = (Vec<(u8, u8)>, Vec<u8>);

struct CanonCtx {
    /// Node lists per stage, each sorted; relabelings permute within stages.
    nodes_by_stage: Vec<Vec<NodeValue>>,
    stage_perms: Vec<Vec<Vec<usize>>>,
    node_count: usize,
}

impl CanonCtx {
    fn for_tree(tree: &Tree) -> Self {
        let mut nodes_by_stage: Vec<Vec<NodeValue>> = Vec::new();
        for (node, stage) in &tree.derived().stage {
            if nodes_by_stage.len() <= *stage {
                nodes_by_stage.resize(*stage + 1, Vec::new());
            }
            nodes_by_stage[*stage].push(node.clone());
        }
        let stage_perms = nodes_by_stage
            .iter()
            .map(|nodes| permutations(nodes.len()))
            .collect();
        CanonCtx {
            node_count: tree.nodes().len(),
            nodes_by_stage,
            stage_perms,
        }
    }

    fn for_preform(pf: &Preform) -> Self {
        let mut nodes_by_stage: Vec<Vec<NodeValue>> = Vec::new();
        for (node, stage) in &pf.derived().tree.stage {
            if nodes_by_stage.len() <= *stage {
                nodes_by_stage.resize(*stage + 1, Vec::new());
            }
            nodes_by_stage[*stage].push(node.clone());
        }
        let stage_perms = nodes_by_stage
            .iter()
            .map(|nodes| permutations(nodes.len()))
            .collect();
        CanonCtx {
            node_count: pf.nodes().len(),
            nodes_by_stage,
            stage_perms,
        }
    }

    /// The least key over every stage-respecting relabeling. `owner` gives
    /// each choice's player class for form keys.
    fn canonical_key(&self, edges: &[Edge], owner: Option<&BTreeMap<Label, usize>>) -> CanonKey {
        let mut best: Option<CanonKey> = None;
        let mut perm_choice = vec![0usize; self.nodes_by_stage.len()];
        loop {
            // Node indices for this candidate: stages in order, permuted within.
            let mut index: BTreeMap<&NodeValue, u8> = BTreeMap::new();
            let mut next = 0u8;
            for (stage, nodes) in self.nodes_by_stage.iter().enumerate() {
                let perm = &self.stage_perms[stage][perm_choice[stage]];
                for &position in perm {
                    index.insert(&nodes[position], next);
                    next += 1;
                }
            }

            let mut produced: Vec<Option<(u8, &Label)>> = vec![None; self.node_count];
            for edge in edges {
                let res = index[&edge.result] as usize;
                produced[res] = Some((index[&edge.source], &edge.choice));
            }
            // Rename choices by first use along the produced-node order.
            let mut rename: BTreeMap<&Label, u8> = BTreeMap::new();
            let mut originals: Vec<&Label> = Vec::new();
            let mut key_edges = Vec::with_capacity(self.node_count - 1);
            for slot in produced.iter().skip(1) {
                let (src, choice) = slot.expect("every non-root node is produced");
                let next_choice = rename.len() as u8;
                let renamed = *rename.entry(choice).or_insert_with(|| {
                    originals.push(choice);
                    next_choice
                });
                key_edges.push((src, renamed));
            }
            let classes = match owner {
                None => Vec::new(),
                Some(owner) => {
                    let mut renumber: BTreeMap<usize, u8> = BTreeMap::new();
                    originals
                        .iter()
                        .map(|choice| {
                            let class = owner[*choice];
                            let next_class = renumber.len() as u8;
                            *renumber.entry(class).or_insert(next_class)
                        })
                        .collect()
                }
            };
            let key = (key_edges, classes);
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }

            // Odometer over the per-stage permutation choices.
            let mut stage = 0;
            loop {
                if stage == perm_choice.len() {
                    return best.expect("at least one candidate");
                }
                perm_choice[stage] += 1;
                if perm_choice[stage] < self.stage_perms[stage].len() {
                    break;
                }
                perm_choice[stage] = 0;
                stage += 1;
            }
        }
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut all = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    permute(&mut items, 0, &mut all);
    all
}

fn permute(items: &mut Vec<usize>, at: usize, out: &mut Vec<Vec<usize>>) {
    if at == items.len() {
        out.push(items.clone());
        return;
    }
    for i in at..items.len() {
        items.swap(at, i);
        permute(items, at + 1, out);
        items.swap(at, i);
    }
}

fn canonical_preform_from_key(key: &CanonKey) -> Preform {
    let node_count = key.0.len() + 1;
    let node = |i: usize| NodeValue::Atom(label(&format!("n{i}")));
    let choice = |j: u8| label(&format!("c{j}"));
    let mut edges = Vec::new();
    let mut choices = BTreeSet::new();
    for (res, (src, ch)) in key.0.iter().enumerate() {
        edges.push(Edge::new(node(*src as usize), choice(*ch), node(res + 1)));
        choices.insert(choice(*ch));
    }
    Preform::validate((0..node_count).map(node), choices, edges)
        .expect("canonical keys come from valid labelings")
}

fn canonical_form_from_key(key: &CanonKey) -> Form {
    let node_count = key.0.len() + 1;
    let node = |i: usize| NodeValue::Atom(label(&format!("n{i}")));
    let choice = |j: usize| label(&format!("c{j}"));
    let mut edges = Vec::new();
    for (res, (src, ch)) in key.0.iter().enumerate() {
        edges.push(Edge::new(node(*src as usize), choice(*ch as usize), node(res + 1)));
    }
    let mut assignment: BTreeMap<Label, BTreeSet<Label>> = BTreeMap::new();
    for (j, class) in key.1.iter().enumerate() {
        assignment
            .entry(label(&format!("{}", class + 1)))
            .or_default()
            .insert(choice(j));
    }
    Form::validate(assignment, (0..node_count).map(node), edges)
        .expect("canonical keys come from valid labelings")
}

// ---------------------------------------------------------------------------
// Preform and form enumeration

/// All set partitions of `0..n` with at most `max_blocks` blocks, as
/// block-index vectors with blocks numbered by first appearance.
fn set_partitions(n: usize, max_blocks: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; n];
    fn rec(
        current: &mut Vec<usize>,
        at: usize,
        used: usize,
        max_blocks: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        if at == current.len() {
            out.push(current.clone());
            return;
        }
        let cap = (used + 1).min(max_blocks);
        for block in 0..cap {
            current[at] = block;
            rec(current, at + 1, used.max(block + 1), max_blocks, out);
        }
    }
    if n == 0 {
        out.push(Vec::new());
    } else {
        rec(&mut current, 0, 0, max_blocks, &mut out);
    }
    out
}

/// Every choice labeling of a tree compatible with the preform axioms, as
/// raw edge lists: partition the decision nodes into equal-out-degree
/// blocks, give each block its own choice set, and label each member's
/// edges by a bijection (the first member canonically, the rest freely).
fn raw_labelings(tree: &Tree) -> Vec<Vec<Edge>> {
    let derived = tree.derived();
    let mut children: BTreeMap<&NodeValue, Vec<&NodeValue>> = BTreeMap::new();
    for (child, parent) in tree.pred() {
        children.entry(parent).or_default().push(child);
    }
    let decision: Vec<&NodeValue> = derived.decision_nodes.iter().collect();
    let degree: Vec<usize> = decision.iter().map(|n| children[*n].len()).collect();

    let mut out = Vec::new();
    for partition in set_partitions(decision.len(), decision.len()) {
        let block_count = partition.iter().copied().max().map_or(0, |m| m + 1);
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); block_count];
        for (i, block) in partition.iter().enumerate() {
            blocks[*block].push(i);
        }
        if blocks
            .iter()
            .any(|members| members.iter().any(|&m| degree[m] != degree[members[0]]))
        {
            continue;
        }
        let mut base = Vec::with_capacity(block_count);
        let mut running = 0usize;
        for members in &blocks {
            base.push(running);
            running += degree[members[0]];
        }

        // One free permutation per non-first block member.
        let slots: Vec<(usize, usize)> = blocks
            .iter()
            .enumerate()
            .flat_map(|(b, members)| members.iter().skip(1).map(move |&m| (b, m)))
            .collect();
        let slot_perms: Vec<Vec<Vec<usize>>> = slots
            .iter()
            .map(|(b, _)| permutations(degree[blocks[*b][0]]))
            .collect();

        let mut pick = vec![0usize; slots.len()];
        let mut exhausted = false;
        while !exhausted {
            let mut edges = Vec::new();
            for (b, members) in blocks.iter().enumerate() {
                for (slot_rank, &member) in members.iter().enumerate() {
                    let node = decision[member];
                    let kids = &children[node];
                    let perm: Vec<usize> = if slot_rank == 0 {
                        (0..kids.len()).collect()
                    } else {
                        let slot_index = slots
                            .iter()
                            .position(|&(sb, sm)| sb == b && sm == member)
                            .expect("member is a slot");
                        slot_perms[slot_index][pick[slot_index]].clone()
                    };
                    for (k, child) in kids.iter().enumerate() {
                        let choice = label(&format!("c{}", base[b] + perm[k]));
                        edges.push(Edge::new((*node).clone(), choice, (*child).clone()));
                    }
                }
            }
            out.push(edges);

            // Advance the odometer over the free permutation slots.
            exhausted = true;
            for slot in 0..pick.len() {
                pick[slot] += 1;
                if pick[slot] < slot_perms[slot].len() {
                    exhausted = false;
                    break;
                }
                pick[slot] = 0;
            }
        }
    }
    out
}

/// All preforms with 2..=max nodes, one canonical representative per
/// isomorphism class, in deterministic order.
pub fn enumerate_preforms(max_nodes: usize) -> Result<Vec<Preform>, OracleError> {
    if max_nodes < 2 {
        return Err(OracleError::BoundTooSmall { what: "node", min: 2, got: max_nodes });
    }
    let trees = enumerate_trees(max_nodes)?;
    let per_tree: Vec<Vec<Preform>> = trees
        .par_iter()
        .map(|tree| {
            let ctx = CanonCtx::for_tree(tree);
            let mut keys: BTreeSet<CanonKey> = BTreeSet::new();
            for edges in raw_labelings(tree) {
                keys.insert(ctx.canonical_key(&edges, None));
            }
            keys.iter().map(canonical_preform_from_key).collect()
        })
        .collect();
    Ok(per_tree.into_iter().flatten().collect())
}

fn forms_over_preform(pf: &Preform, max_players: usize) -> Vec<Form> {
    // Choice classes: choices sharing an information set must share a player.
    let mut classes: BTreeMap<&crate::preform::InfoSet, Vec<&Label>> = BTreeMap::new();
    let derived = pf.derived();
    for choice in pf.choices() {
        let preimage: crate::preform::InfoSet = derived
            .feasibility
            .iter()
            .filter(|(_, c)| c == choice)
            .map(|(t, _)| t.clone())
            .collect();
        let class = derived
            .info_sets
            .iter()
            .find(|s| **s == preimage)
            .expect("preimage is an information set");
        classes.entry(class).or_default().push(choice);
    }
    let class_list: Vec<&Vec<&Label>> = classes.values().collect();

    let ctx = CanonCtx::for_preform(pf);
    let edges: Vec<Edge> = pf.edges().iter().cloned().collect();
    let mut keys: BTreeSet<CanonKey> = BTreeSet::new();
    for partition in set_partitions(class_list.len(), max_players) {
        let mut owner: BTreeMap<Label, usize> = BTreeMap::new();
        for (class_idx, player) in partition.iter().enumerate() {
            for choice in class_list[class_idx] {
                owner.insert((*choice).clone(), *player);
            }
        }
        keys.insert(ctx.canonical_key(&edges, Some(&owner)));
    }
    keys.iter().map(canonical_form_from_key).collect()
}

fn enumerate_forms_filtered(
    max_nodes: usize,
    max_players: usize,
    keep_preform: impl Fn(&Preform) -> bool + Sync,
) -> Result<Vec<Form>, OracleError> {
    if max_players < 1 {
        return Err(OracleError::BoundTooSmall { what: "player", min: 1, got: max_players });
    }
    let preforms = enumerate_preforms(max_nodes)?;
    let per_preform: Vec<Vec<Form>> = preforms
        .par_iter()
        .map(|pf| {
            if keep_preform(pf) {
                forms_over_preform(pf, max_players)
            } else {
                Vec::new()
            }
        })
        .collect();
    Ok(per_preform.into_iter().flatten().collect())
}

/// All forms with 2..=max nodes and at most `max_players` nonvacuous
/// players, one canonical representative per isomorphism class. Vacuous
/// players are excluded from enumeration: adding them never changes the
/// isomorphism class structure of the universe.
pub fn enumerate_forms(max_nodes: usize, max_players: usize) -> Result<Vec<Form>, OracleError> {
    enumerate_forms_filtered(max_nodes, max_players, |_| true)
}

// ---------------------------------------------------------------------------
// Subcategory universes and enclosure verification

/// One canonical representative of every isomorphism class of the
/// subcategory with at most `max_nodes` nodes. Style restrictions are
/// realized constructively: sequence and set universes are the converted
/// images of the abstract universes, which hit every class exactly once.
pub fn subcategory_universe(
    id: SubcategoryId,
    max_nodes: usize,
) -> Result<Vec<UniverseObject>, OracleError> {
    let property_ok = |pf: &Preform| id.property_ok(pf);
    let convertible = |pf: &Preform| match id.style {
        Style::ChoiceSet => no_absentmindedness(pf).holds(),
        _ => true,
    };
    match id.level {
        Level::Preform => {
            let base = enumerate_preforms(max_nodes)?;
            Ok(base
                .into_iter()
                .filter(|pf| property_ok(pf) && convertible(pf))
                .map(|pf| match id.style {
                    Style::Any => UniverseObject::Preform(pf),
                    Style::ChoiceSequence => {
                        UniverseObject::Preform(preform_to_choice_sequence(&pf).0)
                    }
                    Style::ChoiceSet => {
                        let (mid, _) = preform_to_choice_sequence(&pf);
                        UniverseObject::Preform(
                            preform_to_choice_set(&mid).expect("no-absentminded").0,
                        )
                    }
                })
                .collect())
        }
        Level::Form => {
            let base = enumerate_forms_filtered(max_nodes, max_nodes, |pf| {
                property_ok(pf) && convertible(pf)
            })?;
            Ok(base
                .into_iter()
                .map(|f| match id.style {
                    Style::Any => UniverseObject::Form(f),
                    Style::ChoiceSequence => UniverseObject::Form(to_choice_sequence(&f).0),
                    Style::ChoiceSet => {
                        let (mid, _) = to_choice_sequence(&f);
                        UniverseObject::Form(to_choice_set(&mid).expect("no-absentminded").0)
                    }
                })
                .collect())
        }
    }
}

/// How one object was shown to have an isomorph in the target subcategory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnclosureMethod {
    /// The object already satisfies the target's membership predicate.
    Member,
    /// A style converter produced a verified isomorphic member.
    Constructed,
    /// Exhaustive search found an isomorphic member of the target universe.
    Found { target: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectOutcome {
    /// Canonical serialization of the source object.
    pub object: String,
    pub method: EnclosureMethod,
}

/// Replayable evidence that an exhaustive same-signature search found no
/// isomorph: the signature class searched, how many candidate objects it
/// contained, and how many node assignments the searches explored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchCertificate {
    pub signature: String,
    pub candidates_searched: usize,
    pub assignments_explored: u64,
}

impl fmt::Display for SearchCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "searched {} candidate(s) in class [{}], exploring {} assignments",
            self.candidates_searched, self.signature, self.assignments_explored
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub object: String,
    pub certificate: SearchCertificate,
}

/// The outcome of checking one isomorphic-enclosure claim at a node bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnclosureResult {
    pub from: SubcategoryId,
    pub to: SubcategoryId,
    pub node_bound: usize,
    pub verified: bool,
    pub objects_checked: usize,
    pub outcomes: Vec<ObjectOutcome>,
    pub counterexample: Option<Counterexample>,
}

struct TargetIndex {
    objects: Vec<UniverseObject>,
    forms: Vec<Form>,
    by_signature: BTreeMap<String, Vec<usize>>,
}

impl TargetIndex {
    fn build(objects: Vec<UniverseObject>) -> Self {
        let forms: Vec<Form> = objects.iter().map(|o| o.search_form()).collect();
        let mut by_signature: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, form) in forms.iter().enumerate() {
            by_signature.entry(signature(form).to_string()).or_default().push(i);
        }
        TargetIndex { objects, forms, by_signature }
    }

    /// Exhaustive same-signature search; `Ok` is the found target, `Err` the
    /// certificate that none exists.
    fn search(&self, object: &UniverseObject) -> Result<String, SearchCertificate> {
        let form = object.search_form();
        let sig = signature(&form).to_string();
        let candidates = self.by_signature.get(&sig).map_or(&[][..], |v| &v[..]);
        let mut explored = 0u64;
        for &idx in candidates {
            match find_isomorphism(&form, &self.forms[idx]) {
                Ok(_) => return Ok(self.objects[idx].serialize()),
                Err(cert) => explored += cert.assignments_explored,
            }
        }
        Err(SearchCertificate {
            signature: sig,
            candidates_searched: candidates.len(),
            assignments_explored: explored,
        })
    }
}

/// Converts an object into the target style and fully verifies the returned
/// witness; `None` when the conversion is refused (absentminded input).
fn convert_into_style(object: &UniverseObject, style: Style) -> Option<UniverseObject> {
    match (object, style) {
        (UniverseObject::Form(f), Style::ChoiceSequence) => {
            let (image, witness) = to_choice_sequence(f);
            let report = isomorphism_consequences(&witness);
            assert!(report.all_pass(), "conversion witness failed: {report}");
            Some(UniverseObject::Form(image))
        }
        (UniverseObject::Form(f), Style::ChoiceSet) => {
            let (mid, first) = to_choice_sequence(f);
            let (image, second) = to_choice_set(&mid).ok()?;
            let witness = crate::morphism::IsoWitness::compose(&second, &first)
                .expect("conversion witnesses compose");
            let report = isomorphism_consequences(&witness);
            assert!(report.all_pass(), "conversion witness failed: {report}");
            Some(UniverseObject::Form(image))
        }
        (UniverseObject::Preform(p), Style::ChoiceSequence) => {
            let (image, morphism) = preform_to_choice_sequence(p);
            assert!(morphism.is_isomorphism());
            Some(UniverseObject::Preform(image))
        }
        (UniverseObject::Preform(p), Style::ChoiceSet) => {
            let (mid, _) = preform_to_choice_sequence(p);
            let (image, morphism) = preform_to_choice_set(&mid).ok()?;
            assert!(morphism.is_isomorphism());
            Some(UniverseObject::Preform(image))
        }
        (_, Style::Any) => None,
    }
}

/// Checks that every object of `from` with at most `max_nodes` nodes has an
/// isomorph in `to`. Each object is handled by the cheapest honest route:
/// direct membership, then (with `constructive`) a verified style
/// conversion, then exhaustive same-signature search over the target
/// universe. A failed search yields the first counterexample together with
/// an exhaustiveness certificate.
pub fn verify_enclosure(
    from: SubcategoryId,
    to: SubcategoryId,
    max_nodes: usize,
    constructive: bool,
) -> Result<EnclosureResult, OracleError> {
    if from.level != to.level {
        return Err(OracleError::LevelMismatch(from, to));
    }
    let from_universe = subcategory_universe(from, max_nodes)?;
    let mut target: Option<TargetIndex> = None;
    let mut outcomes = Vec::new();
    let mut counterexample = None;
    let mut checked = 0;

    for object in &from_universe {
        checked += 1;
        if to.contains(object) {
            outcomes.push(ObjectOutcome {
                object: object.serialize(),
                method: EnclosureMethod::Member,
            });
            continue;
        }
        if constructive && to.style != Style::Any {
            if let Some(image) = convert_into_style(object, to.style) {
                if to.contains(&image) {
                    outcomes.push(ObjectOutcome {
                        object: object.serialize(),
                        method: EnclosureMethod::Constructed,
                    });
                    continue;
                }
            }
        }
        let index = match &target {
            Some(index) => index,
            None => {
                target = Some(TargetIndex::build(subcategory_universe(to, max_nodes)?));
                target.as_ref().expect("just built")
            }
        };
        match index.search(object) {
            Ok(found) => outcomes.push(ObjectOutcome {
                object: object.serialize(),
                method: EnclosureMethod::Found { target: found },
            }),
            Err(certificate) => {
                counterexample = Some(Counterexample {
                    object: object.serialize(),
                    certificate,
                });
                break;
            }
        }
    }

    Ok(EnclosureResult {
        from,
        to,
        node_bound: max_nodes,
        verified: counterexample.is_none(),
        objects_checked: checked,
        outcomes,
        counterexample,
    })
}

/// Both enclosure directions, each verified constructively where a style
/// converter applies and by membership otherwise.
pub fn verify_equivalence(
    a: SubcategoryId,
    b: SubcategoryId,
    max_nodes: usize,
) -> Result<(EnclosureResult, EnclosureResult), OracleError> {
    let forward = verify_enclosure(a, b, max_nodes, true)?;
    let backward = verify_enclosure(b, a, max_nodes, true)?;
    Ok((forward, backward))
}

/// The outcome of checking that `weak` strictly encloses `strong`: the
/// inclusion of `strong` in `weak`, and a weak object exhaustively shown to
/// have no strong isomorph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrictnessResult {
    pub weak: SubcategoryId,
    pub strong: SubcategoryId,
    pub node_bound: usize,
    pub inclusion: EnclosureResult,
    pub strict: bool,
    pub witness: Option<Counterexample>,
}

/// Verifies `strong → weak` and then hunts for a weak object with no strong
/// isomorph, scanning the weak universe in canonical order.
pub fn verify_strictness(
    weak: SubcategoryId,
    strong: SubcategoryId,
    max_nodes: usize,
) -> Result<StrictnessResult, OracleError> {
    if weak.level != strong.level {
        return Err(OracleError::LevelMismatch(weak, strong));
    }
    let inclusion = verify_enclosure(strong, weak, max_nodes, true)?;
    let weak_universe = subcategory_universe(weak, max_nodes)?;
    let index = TargetIndex::build(subcategory_universe(strong, max_nodes)?);
    let mut witness = None;
    for object in &weak_universe {
        if strong.contains(object) {
            continue;
        }
        match index.search(object) {
            Ok(_) => continue,
            Err(certificate) => {
                witness = Some(Counterexample {
                    object: object.serialize(),
                    certificate,
                });
                break;
            }
        }
    }
    Ok(StrictnessResult {
        weak,
        strong,
        node_bound: max_nodes,
        inclusion,
        strict: witness.is_some(),
        witness,
    })
}
