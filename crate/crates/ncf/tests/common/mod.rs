//! Shared fixtures, independent brute-force oracles, and the morphism pool
//! used by the acceptance and law suites. Everything here is deliberately
//! naive: the oracles must not share logic with the code paths they check.

// Each integration test binary compiles this module separately and uses a
// different subset of it.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ncf::form::Form;
use ncf::morphism::FormMorphism;
use ncf::node::{label, Label, NodeValue};
use ncf::preform::{Edge, Preform};
use ncf::transport::{to_choice_sequence, transport_form, TransportSpec};

pub fn seq(items: &[&str]) -> NodeValue {
    NodeValue::seq(items.iter().copied())
}

pub fn absentminded_preform() -> Preform {
    let e = |s: &[&str], c: &str, r: &[&str]| Edge::new(seq(s), label(c), seq(r));
    Preform::validate(
        [seq(&[]), seq(&["a"]), seq(&["b"]), seq(&["a", "a"]), seq(&["a", "b"])],
        [label("a"), label("b")],
        [
            e(&[], "a", &["a"]),
            e(&[], "b", &["b"]),
            e(&["a"], "a", &["a", "a"]),
            e(&["a"], "b", &["a", "b"]),
        ],
    )
    .expect("valid preform")
}

pub fn simultaneous_preform() -> Preform {
    let e = |s: &[&str], c: &str, r: &[&str]| Edge::new(seq(s), label(c), seq(r));
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
            e(&[], "a", &["a"]),
            e(&[], "b", &["b"]),
            e(&["a"], "c", &["a", "c"]),
            e(&["a"], "d", &["a", "d"]),
            e(&["b"], "c", &["b", "c"]),
            e(&["b"], "d", &["b", "d"]),
        ],
    )
    .expect("valid preform")
}

pub fn absentminded_form() -> Form {
    let pf = absentminded_preform();
    Form::validate(
        [(label("1"), [label("a"), label("b")].into())],
        pf.nodes().iter().cloned(),
        pf.edges().iter().cloned(),
    )
    .expect("valid form")
}

pub fn simultaneous_form() -> Form {
    let pf = simultaneous_preform();
    Form::validate(
        [
            (label("1"), [label("a"), label("b")].into()),
            (label("2"), [label("c"), label("d")].into()),
        ],
        pf.nodes().iter().cloned(),
        pf.edges().iter().cloned(),
    )
    .expect("valid form")
}

/// An atom-node isomorphic copy of the simultaneous form.
pub fn renamed_simultaneous() -> (Form, ncf::morphism::IsoWitness) {
    let form = simultaneous_form();
    let node_bij: BTreeMap<NodeValue, NodeValue> = form
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), NodeValue::Atom(label(&format!("v{i}")))))
        .collect();
    let spec = TransportSpec {
        player_bij: form.players().map(|p| (p.clone(), p.clone())).collect(),
        node_bij,
        choice_bij: form.choices().iter().map(|c| (c.clone(), c.clone())).collect(),
    };
    transport_form(&form, &spec).expect("bijective rename")
}

// ---------------------------------------------------------------------------
// Independent counting oracle for rooted trees

/// Counts of rooted trees on 1..=max unlabeled nodes, by the divisor-sum
/// recurrence (independent of the shape generator).
pub fn rooted_tree_counts(max: usize) -> Vec<u64> {
    let mut a = vec![0u64; max + 1];
    a[1] = 1;
    for n in 2..=max {
        let mut total = 0u64;
        for k in 1..n {
            let s: u64 = (1..=k).filter(|d| k % d == 0).map(|d| d as u64 * a[d]).sum();
            total += s * a[n - k];
        }
        a[n] = total / (n as u64 - 1);
    }
    a[1..].to_vec()
}

// ---------------------------------------------------------------------------
// Naive generate-and-dedupe enumeration oracle (exact for small sizes)

/// A canonical fingerprint minimized over ALL node bijections, not just the
/// stage-respecting ones the production enumerator uses.
type NaiveKey = (Vec<Option<(u8, u8)>>, Vec<u8>);

fn naive_key_of(edges: &BTreeSet<Edge>, nodes: &BTreeSet<NodeValue>, owner: Option<&BTreeMap<Label, usize>>) -> NaiveKey {
    let node_list: Vec<&NodeValue> = nodes.iter().collect();
    let mut best: Option<NaiveKey> = None;
    for perm in (0..node_list.len()).permutations(node_list.len()) {
        let mut index: BTreeMap<&NodeValue, u8> = BTreeMap::new();
        for (slot, &which) in perm.iter().enumerate() {
            index.insert(node_list[which], slot as u8);
        }
        let mut produced: Vec<Option<(u8, &Label)>> = vec![None; node_list.len()];
        for edge in edges {
            produced[index[&edge.result] as usize] = Some((index[&edge.source], &edge.choice));
        }
        let mut rename: BTreeMap<&Label, u8> = BTreeMap::new();
        let mut originals: Vec<&Label> = Vec::new();
        let mut key_edges = Vec::new();
        for slot in &produced {
            key_edges.push(slot.map(|(src, choice)| {
                let next = rename.len() as u8;
                let renamed = *rename.entry(choice).or_insert_with(|| {
                    originals.push(choice);
                    next
                });
                (src, renamed)
            }));
        }
        let classes = match owner {
            None => Vec::new(),
            Some(owner) => {
                let mut renumber: BTreeMap<usize, u8> = BTreeMap::new();
                originals
                    .iter()
                    .map(|c| {
                        let next = renumber.len() as u8;
                        *renumber.entry(owner[*c]).or_insert(next)
                    })
                    .collect()
            }
        };
        let key = (key_edges, classes);
        if best.as_ref().is_none_or(|b| key < *b) {
            best = Some(key);
        }
    }
    best.expect("at least one permutation")
}

type LabeledTree = (BTreeSet<NodeValue>, Vec<(NodeValue, NodeValue)>);

/// Every labeled functioned tree on exactly `k` named nodes.
fn naive_labeled_trees(k: usize) -> Vec<LabeledTree> {
    let nodes: Vec<NodeValue> = (0..k)
        .map(|i| NodeValue::Atom(label(&format!("x{i}"))))
        .collect();
    let node_set: BTreeSet<NodeValue> = nodes.iter().cloned().collect();
    let mut out = Vec::new();
    for root in 0..k {
        let others: Vec<usize> = (0..k).filter(|&i| i != root).collect();
        let mut assignment = vec![0usize; others.len()];
        loop {
            let pred: Vec<(NodeValue, NodeValue)> = others
                .iter()
                .zip(&assignment)
                .map(|(&child, &parent)| (nodes[child].clone(), nodes[parent].clone()))
                .collect();
            if ncf::tree::Tree::validate(node_set.iter().cloned(), pred.clone()).is_ok() {
                out.push((node_set.clone(), pred));
            }
            let mut i = 0;
            loop {
                if i == assignment.len() {
                    break;
                }
                assignment[i] += 1;
                if assignment[i] < k {
                    break;
                }
                assignment[i] = 0;
                i += 1;
            }
            if assignment.iter().all(|&a| a == 0) {
                break;
            }
        }
        if k == 1 {
            break;
        }
    }
    out
}

/// The number of preform isomorphism classes on exactly `k` nodes, found by
/// generating every labeled tree, every edge labeling over a sufficient
/// choice pool, validating, and deduplicating by the all-permutations key.
pub fn naive_preform_class_count(k: usize) -> usize {
    let pool: Vec<Label> = (0..k.saturating_sub(1))
        .map(|i| label(&format!("c{i}")))
        .collect();
    let mut classes: BTreeSet<NaiveKey> = BTreeSet::new();
    for (nodes, pred) in naive_labeled_trees(k) {
        let edge_count = pred.len();
        let mut pick = vec![0usize; edge_count];
        loop {
            let edges: BTreeSet<Edge> = pred
                .iter()
                .zip(&pick)
                .map(|((child, parent), &c)| {
                    Edge::new(parent.clone(), pool[c].clone(), child.clone())
                })
                .collect();
            let choices: BTreeSet<Label> = edges.iter().map(|e| e.choice.clone()).collect();
            if Preform::validate(nodes.iter().cloned(), choices, edges.iter().cloned()).is_ok() {
                classes.insert(naive_key_of(&edges, &nodes, None));
            }
            let mut i = 0;
            loop {
                if i == pick.len() {
                    break;
                }
                pick[i] += 1;
                if pick[i] < pool.len() {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
            if pick.iter().all(|&p| p == 0) {
                break;
            }
        }
    }
    classes.len()
}

/// The number of form isomorphism classes on exactly `k` nodes (players
/// unbounded), by assigning every choice-to-player function over every valid
/// preform labeling and deduplicating.
pub fn naive_form_class_count(k: usize) -> usize {
    let pool: Vec<Label> = (0..k.saturating_sub(1))
        .map(|i| label(&format!("c{i}")))
        .collect();
    let mut classes: BTreeSet<NaiveKey> = BTreeSet::new();
    for (nodes, pred) in naive_labeled_trees(k) {
        let edge_count = pred.len();
        let mut pick = vec![0usize; edge_count];
        loop {
            let edges: BTreeSet<Edge> = pred
                .iter()
                .zip(&pick)
                .map(|((child, parent), &c)| {
                    Edge::new(parent.clone(), pool[c].clone(), child.clone())
                })
                .collect();
            let choices: Vec<Label> = edges
                .iter()
                .map(|e| e.choice.clone())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let preform_ok =
                Preform::validate(nodes.iter().cloned(), choices.iter().cloned(), edges.iter().cloned())
                    .is_ok();
            if preform_ok {
                let mut owner_pick = vec![0usize; choices.len()];
                loop {
                    let mut assignment: BTreeMap<Label, BTreeSet<Label>> = BTreeMap::new();
                    let mut owner: BTreeMap<Label, usize> = BTreeMap::new();
                    for (choice, &player) in choices.iter().zip(&owner_pick) {
                        assignment
                            .entry(label(&format!("p{player}")))
                            .or_default()
                            .insert(choice.clone());
                        owner.insert(choice.clone(), player);
                    }
                    if Form::validate(assignment, nodes.iter().cloned(), edges.iter().cloned())
                        .is_ok()
                    {
                        classes.insert(naive_key_of(&edges, &nodes, Some(&owner)));
                    }
                    let mut i = 0;
                    loop {
                        if i == owner_pick.len() {
                            break;
                        }
                        owner_pick[i] += 1;
                        if owner_pick[i] < choices.len() {
                            break;
                        }
                        owner_pick[i] = 0;
                        i += 1;
                    }
                    if owner_pick.iter().all(|&p| p == 0) {
                        break;
                    }
                }
            }
            let mut i = 0;
            loop {
                if i == pick.len() {
                    break;
                }
                pick[i] += 1;
                if pick[i] < pool.len() {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
            if pick.iter().all(|&p| p == 0) {
                break;
            }
        }
    }
    classes.len()
}

// ---------------------------------------------------------------------------
// Naive isomorphism decision (all bijections, straight from the definition)

/// True iff some triple of bijections is a form isomorphism, checked against
/// the raw definition: edges map onto edges and each player's choices map
/// into the image player's.
pub fn naive_isomorphic(a: &Form, b: &Form) -> bool {
    if a.nodes().len() != b.nodes().len()
        || a.choices().len() != b.choices().len()
        || a.player_count() != b.player_count()
        || a.edges().len() != b.edges().len()
    {
        return false;
    }
    let a_nodes: Vec<&NodeValue> = a.nodes().iter().collect();
    let b_nodes: Vec<&NodeValue> = b.nodes().iter().collect();
    let a_choices: Vec<&Label> = a.choices().iter().collect();
    let b_choices: Vec<&Label> = b.choices().iter().collect();
    let a_players: Vec<&Label> = a.players().collect();
    let b_players: Vec<&Label> = b.players().collect();

    for node_perm in b_nodes.iter().permutations(b_nodes.len()) {
        let tau: BTreeMap<&NodeValue, &NodeValue> =
            a_nodes.iter().copied().zip(node_perm.into_iter().copied()).collect();
        'delta: for choice_perm in b_choices.iter().permutations(b_choices.len()) {
            let delta: BTreeMap<&Label, &Label> = a_choices
                .iter()
                .copied()
                .zip(choice_perm.into_iter().copied())
                .collect();
            for edge in a.edges() {
                let image = Edge::new(
                    (*tau[&edge.source]).clone(),
                    delta[&edge.choice].clone(),
                    (*tau[&edge.result]).clone(),
                );
                if !b.edges().contains(&image) {
                    continue 'delta;
                }
            }
            'iota: for player_perm in b_players.iter().permutations(b_players.len()) {
                let iota: BTreeMap<&Label, &Label> = a_players
                    .iter()
                    .copied()
                    .zip(player_perm.into_iter().copied())
                    .collect();
                for (player, owned) in a.assignment() {
                    let image_owned = b.choices_of(iota[player]).expect("player of b");
                    if !owned.iter().all(|c| image_owned.contains(delta[c])) {
                        continue 'iota;
                    }
                }
                return true;
            }
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Morphism pool for the category-law, inversion, and pullback suites

pub struct Pool {
    pub triples: Vec<(FormMorphism, FormMorphism, FormMorphism)>,
    pub morphisms: Vec<FormMorphism>,
}

fn random_spec(form: &Form, tag: &str, rng: &mut ChaCha8Rng) -> TransportSpec {
    let mut node_targets: Vec<NodeValue> = (0..form.nodes().len())
        .map(|i| NodeValue::Atom(label(&format!("{tag}n{i}"))))
        .collect();
    node_targets.shuffle(rng);
    let mut choice_targets: Vec<Label> = (0..form.choices().len())
        .map(|i| label(&format!("{tag}c{i}")))
        .collect();
    choice_targets.shuffle(rng);
    let mut player_targets: Vec<Label> = (0..form.player_count())
        .map(|i| label(&format!("{tag}p{i}")))
        .collect();
    player_targets.shuffle(rng);
    TransportSpec {
        player_bij: form.players().cloned().zip(player_targets).collect(),
        node_bij: form.nodes().iter().cloned().zip(node_targets).collect(),
        choice_bij: form.choices().iter().cloned().zip(choice_targets).collect(),
    }
}

pub fn random_transport_spec(form: &Form, salt: u64) -> TransportSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e6366 ^ salt);
    random_spec(form, &format!("r{salt}_"), &mut rng)
}

/// Composable triples (f: w→x, g: x→y, h: y→z) built from identities,
/// random transports, subform inclusions, and conversion witnesses over the
/// fixtures and the four-node universe.
pub fn build_pool() -> Pool {
    let mut rng = ChaCha8Rng::seed_from_u64(0x636174);
    let mut bases: Vec<Form> = vec![absentminded_form(), simultaneous_form()];
    bases.extend(ncf::oracle::enumerate_forms(4, 4).expect("small universe"));

    let mut triples = Vec::new();
    for (i, base) in bases.iter().enumerate() {
        // Chains of random transports.
        for round in 0..6 {
            let spec1 = random_spec(base, &format!("a{i}_{round}_"), &mut rng);
            let (mid, w1) = transport_form(base, &spec1).expect("bijective");
            let spec2 = random_spec(&mid, &format!("b{i}_{round}_"), &mut rng);
            let (far, w2) = transport_form(&mid, &spec2).expect("bijective");
            let spec3 = random_spec(&far, &format!("c{i}_{round}_"), &mut rng);
            let (_, w3) = transport_form(&far, &spec3).expect("bijective");
            triples.push((
                w1.forward().clone(),
                w2.forward().clone(),
                w3.forward().clone(),
            ));
        }
        // Identity triple.
        let id = FormMorphism::identity(base);
        triples.push((id.clone(), id.clone(), id));
        // Inclusion of the deepest decision node, continued by a transport.
        let at = base
            .preform_derived()
            .decision_nodes
            .iter()
            .max_by_key(|n| base.preform_derived().tree.stage[*n])
            .expect("forms have a decision node")
            .clone();
        if let Ok((sub, inclusion)) = ncf::morphism::subform_at(base, &at) {
            let _ = sub;
            let spec = random_spec(base, &format!("s{i}_"), &mut rng);
            let (_, w) = transport_form(base, &spec).expect("bijective");
            triples.push((
                inclusion.clone(),
                w.forward().clone(),
                FormMorphism::identity(w.forward().target()),
            ));
        }
        // Conversion witness forth, back, and forth again.
        let (_, csq) = to_choice_sequence(base);
        triples.push((
            csq.forward().clone(),
            csq.inverse().clone(),
            csq.forward().clone(),
        ));
    }

    let mut morphisms = Vec::new();
    for (f, g, h) in &triples {
        morphisms.push(f.clone());
        morphisms.push(g.clone());
        morphisms.push(h.clone());
    }
    Pool { triples, morphisms }
}
