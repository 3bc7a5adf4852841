//! Module-level invariants checked over the enumerated universes: tree and
//! preform structure laws, per-player decompositions, style closed forms,
//! property implications, search/oracle agreement, and schema-level facts
//! about enclosure restriction.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use ncf::form::Form;
use ncf::morphism::{find_isomorphism, forget_morphism, subform_at, FormMorphism};
use ncf::node::{label, Label, NodeValue, SetNode};
use ncf::oracle::{
    enumerate_forms, enumerate_preforms, enumerate_trees, subcategory_universe, verify_enclosure,
    SubcategoryId, UniverseObject,
};
use ncf::preform::Preform;
use ncf::properties::{no_absentmindedness, perfect_information};
use ncf::styles::adjoin_equivalents;
use ncf::transport::{preform_to_choice_sequence, preform_to_choice_set, sequence_node_of};

fn sub(name: &str) -> SubcategoryId {
    name.parse().expect("known subcategory")
}

#[test]
fn tree_laws_over_the_six_node_universe() {
    for tree in enumerate_trees(6).expect("bound ok") {
        let d = tree.derived();
        assert!(tree.nodes().len() >= 2);
        assert!(d.chains_infinite.is_empty());

        // Iterating the predecessor stage-many times lands on the root.
        for node in tree.nodes() {
            let mut here = node.clone();
            for _ in 0..d.stage[node] {
                here = tree.pred()[&here].clone();
            }
            assert_eq!(&here, tree.root());
        }

        for (a, b) in &d.strict_prec {
            assert_ne!(a, b, "strict precedence is irreflexive");
        }
        for (a, b) in &d.strict_prec {
            for (c, e) in &d.strict_prec {
                if b == c {
                    assert!(
                        d.strict_prec.contains(&(a.clone(), e.clone())),
                        "strict precedence is transitive"
                    );
                }
            }
        }
        for node in tree.nodes() {
            assert!(d.weak_prec.contains(&(node.clone(), node.clone())));
        }
        for (a, b) in &d.weak_prec {
            if a != b {
                assert!(
                    !d.weak_prec.contains(&(b.clone(), a.clone())),
                    "weak precedence is antisymmetric"
                );
            }
            for (c, e) in &d.weak_prec {
                if b == c {
                    assert!(d.weak_prec.contains(&(a.clone(), e.clone())));
                }
            }
        }

        // Leaves sit in exactly one maximal chain; every chain has the root.
        for chain in &d.chains_finite {
            assert!(chain.contains(tree.root()));
        }
        for leaf in tree.nodes().iter().filter(|n| !d.decision_nodes.contains(*n)) {
            let containing = d.chains_finite.iter().filter(|c| c.contains(leaf)).count();
            assert_eq!(containing, 1, "leaf {leaf} chain count");
        }
    }
}

#[test]
fn preform_laws_over_the_six_node_universe() {
    for pf in enumerate_preforms(6).expect("bound ok") {
        let d = pf.derived();
        assert!(pf.nodes().len() >= 2);
        assert!(!pf.choices().is_empty());
        assert!(!pf.edges().is_empty());

        // (p, q) inverts the edge operator exactly.
        for node in pf.nodes() {
            if node == pf.root() {
                continue;
            }
            assert_eq!(pf.apply(&d.pred[node], &d.prev_choice[node]), Some(node));
        }
        // No node is produced twice.
        let results: BTreeSet<&NodeValue> = pf.edges().iter().map(|e| &e.result).collect();
        assert_eq!(results.len(), pf.edges().len());

        // Information sets partition the decision nodes.
        let mut seen: BTreeSet<&NodeValue> = BTreeSet::new();
        for set in &d.info_sets {
            assert!(!set.is_empty());
            for node in set {
                assert!(seen.insert(node));
            }
        }
        assert_eq!(seen, d.decision_nodes.iter().collect());

        // A choice is feasible over an information set exactly when that set
        // is its preimage; and the previous choice of a node is feasible
        // over a set exactly when the predecessor lies in it.
        for set in &d.info_sets {
            let feasible = pf.feasible_over(set);
            for choice in pf.choices() {
                let preimage: BTreeSet<NodeValue> = d
                    .feasibility
                    .iter()
                    .filter(|(_, c)| c == choice)
                    .map(|(t, _)| t.clone())
                    .collect();
                assert_eq!(feasible.contains(choice), &preimage == set);
            }
            for node in pf.nodes() {
                if node == pf.root() {
                    continue;
                }
                assert_eq!(
                    feasible.contains(&d.prev_choice[node]),
                    set.contains(&d.pred[node])
                );
            }
        }
    }
}

#[test]
fn form_laws_and_forgetful_round_trip() {
    let mut forms = enumerate_forms(5, 5).expect("bound ok");
    forms.push(absentminded_form());
    forms.push(simultaneous_form());
    for form in &forms {
        let derived = form.derived();
        let preform = form.preform_derived();
        let mut node_union: BTreeSet<&NodeValue> = BTreeSet::new();
        let mut node_total = 0;
        for nodes in derived.player_nodes.values() {
            node_total += nodes.len();
            node_union.extend(nodes);
        }
        assert_eq!(node_total, node_union.len(), "player node sets are disjoint");
        assert_eq!(node_union, preform.decision_nodes.iter().collect());

        let mut set_union: BTreeSet<&BTreeSet<NodeValue>> = BTreeSet::new();
        let mut set_total = 0;
        for (player, sets) in &derived.player_info_sets {
            set_total += sets.len();
            set_union.extend(sets.iter());
            let covered: BTreeSet<&NodeValue> = sets.iter().flatten().collect();
            assert_eq!(covered, derived.player_nodes[player].iter().collect());
        }
        assert_eq!(set_total, set_union.len());
        assert_eq!(set_union, preform.info_sets.iter().collect());
    }

    let mut preforms = enumerate_preforms(4).expect("bound ok");
    preforms.push(absentminded_preform());
    preforms.push(simultaneous_preform());
    for pf in preforms {
        assert_eq!(ncf::morphism::forget_players(&Form::one_player(&pf)), pf);
    }
}

#[test]
fn perfect_information_implies_no_absentmindedness() {
    let mut found_perfect = false;
    for pf in enumerate_preforms(6).expect("bound ok") {
        if perfect_information(&pf).holds() {
            found_perfect = true;
            assert!(no_absentmindedness(&pf).holds());
        }
    }
    assert!(found_perfect);
    // The strict gaps both ways: an absentminded form exists, and so does a
    // no-absentminded form without perfect information.
    assert!(!no_absentmindedness(absentminded_form().preform()).holds());
    assert!(no_absentmindedness(simultaneous_form().preform()).holds());
    assert!(!perfect_information(simultaneous_form().preform()).holds());
}

#[test]
fn style_closed_form_reconstructions() {
    // Sequence preforms: every node is rebuilt from its previous choices.
    for pf in enumerate_preforms(5).expect("bound ok") {
        let (csq, _) = preform_to_choice_sequence(&pf);
        for node in csq.nodes() {
            let history = sequence_node_of(&csq, node).expect("node of the preform");
            assert_eq!(&NodeValue::Seq(history), node);
        }
        if !no_absentmindedness(&csq).holds() {
            continue;
        }
        let (cset, _) = preform_to_choice_set(&csq).expect("no-absentminded");
        let derived = cset.derived();
        for node in cset.nodes() {
            // Every node is the set of previous choices along its walk.
            let mut collected = BTreeSet::new();
            let mut here = node;
            while let Some(choice) = derived.prev_choice.get(here) {
                collected.insert(choice.clone());
                here = &derived.pred[here];
            }
            assert_eq!(&NodeValue::Set(SetNode::new(collected)), node);
        }
        // Set preforms always have no-absentmindedness, and no node meets
        // any information set's feasible choices twice.
        assert!(no_absentmindedness(&cset).holds());
        for node in cset.nodes() {
            let items = node.as_set().expect("set style").items();
            for set in &derived.info_sets {
                let feasible = cset.feasible_over(set);
                assert!(items.intersection(&feasible).count() <= 1);
            }
        }
        // The choice pool is recoverable from the nodes alone: the union of
        // ranges in sequence style, the union of the sets in set style.
        let union_of_sets: BTreeSet<Label> = cset
            .nodes()
            .iter()
            .flat_map(|n| n.as_set().expect("set style").items().iter().cloned())
            .collect();
        assert_eq!(&union_of_sets, cset.choices());
    }
    for pf in enumerate_preforms(5).expect("bound ok") {
        let (csq, _) = preform_to_choice_sequence(&pf);
        let union_of_ranges: BTreeSet<Label> = csq
            .nodes()
            .iter()
            .flat_map(|n| n.as_seq().expect("sequence style").range())
            .collect();
        assert_eq!(&union_of_ranges, csq.choices());
    }
}

#[test]
fn adjoin_equivalents_exhaustive_sweep() {
    let universe = [label("a"), label("b"), label("c")];
    let mut subsets: Vec<SetNode> = vec![SetNode::empty()];
    for item in &universe {
        let mut extended = Vec::new();
        for s in &subsets {
            extended.push(s.adjoin(item.clone()));
        }
        subsets.extend(extended);
    }
    assert_eq!(subsets.len(), 8);
    let mut checked = 0;
    for t in &subsets {
        for c in &universe {
            for t_sharp in &subsets {
                let answers = adjoin_equivalents(t, c, t_sharp);
                assert!(
                    answers.iter().all(|&a| a == answers[0]),
                    "equivalents disagree on ({t:?}, {c}, {t_sharp:?}): {answers:?}"
                );
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 192);
}

#[test]
fn search_agrees_with_the_naive_all_bijections_oracle() {
    let forms = enumerate_forms(4, 4).expect("bound ok");
    let mut agreements = 0;
    for a in &forms {
        for b in &forms {
            let fast = find_isomorphism(a, b).is_ok();
            let slow = naive_isomorphic(a, b);
            assert_eq!(fast, slow, "disagreement on a pair of 4-node forms");
            agreements += 1;
        }
    }
    assert!(agreements >= forms.len() * forms.len());
    // Distinct enumerated representatives are never isomorphic, while every
    // representative is isomorphic to itself.
    for (i, a) in forms.iter().enumerate() {
        for (j, b) in forms.iter().enumerate() {
            assert_eq!(find_isomorphism(a, b).is_ok(), i == j);
        }
    }
}

#[test]
fn form_isomorphism_reduces_to_preform_isomorphism_plus_player_bijection() {
    let pool = build_pool();
    for m in &pool.morphisms {
        let preform_iso = forget_morphism(m).is_isomorphism();
        let players_biject = {
            let image: BTreeSet<&Label> = m.player_map().values().collect();
            image.len() == m.player_map().len() && image.len() == m.target().player_count()
        };
        assert_eq!(m.is_isomorphism(), preform_iso && players_biject);
    }
}

#[test]
fn absentminded_form_has_no_five_node_no_absentminded_isomorph() {
    let universe = subcategory_universe(sub("NCF_noabs"), 5).expect("bound ok");
    let absent = absentminded_form();
    for object in universe {
        let UniverseObject::Form(candidate) = object else { continue };
        assert!(find_isomorphism(&absent, &candidate).is_err());
    }
}

#[test]
fn enclosures_restrict_to_invariant_properties() {
    // If A encloses in B, then the no-absentmindedness and the
    // perfect-information restrictions of A enclose in those of B.
    let cases = [
        ("NCF", "CsqF", "NCF_noabs", "CsqF_noabs"),
        ("NCF", "CsqF", "NCF_perfinfo", "CsqF_perfinfo"),
    ];
    for (a, b, a_w, b_w) in cases {
        let base = verify_enclosure(sub(a), sub(b), 4, true).expect("same level");
        assert!(base.verified);
        let restricted = verify_enclosure(sub(a_w), sub(b_w), 4, true).expect("same level");
        assert!(restricted.verified, "{a_w} -> {b_w} must hold whenever {a} -> {b} does");
    }
    let set_case = verify_enclosure(sub("CsqF_noabs"), sub("CsetF"), 4, true).expect("same level");
    assert!(set_case.verified);
    let set_restricted =
        verify_enclosure(sub("CsqF_perfinfo"), sub("CsetF_perfinfo"), 4, true).expect("same level");
    assert!(set_restricted.verified);
}

#[test]
fn enumerated_objects_revalidate_from_their_components() {
    for pf in enumerate_preforms(5).expect("bound ok") {
        let again = Preform::validate(
            pf.nodes().iter().cloned(),
            pf.choices().iter().cloned(),
            pf.edges().iter().cloned(),
        )
        .expect("emitted preforms validate");
        assert_eq!(again, pf);
    }
    for f in enumerate_forms(5, 5).expect("bound ok") {
        let again = Form::validate(
            f.assignment().clone(),
            f.nodes().iter().cloned(),
            f.edges().iter().cloned(),
        )
        .expect("emitted forms validate");
        assert_eq!(again, f);
    }
}

#[test]
fn preform_level_equivalences_mirror_the_form_level_ones() {
    for (a, b) in [("NCP", "CsqP"), ("CsqP_noabs", "CsetP")] {
        let (forward, backward) =
            ncf::oracle::verify_equivalence(sub(a), sub(b), 4).expect("same level");
        assert!(forward.verified, "{a} -> {b}");
        assert!(backward.verified, "{b} -> {a}");
    }
}

#[test]
fn subform_inclusions_validate_and_classify() {
    // Inclusion is an isomorphism exactly at the root.
    let mut forms = vec![simultaneous_form(), absentminded_form()];
    forms.extend(enumerate_forms(4, 4).expect("bound ok"));
    for form in &forms {
        for node in form.nodes() {
            match subform_at(form, node) {
                Err(_) => continue,
                Ok((subform, inclusion)) => {
                    assert_eq!(inclusion.source(), &subform);
                    assert_eq!(inclusion.target(), form);
                    assert_eq!(inclusion.is_isomorphism(), node == form.root());
                    assert!(ncf::morphism::morphism_consequences(&inclusion).all_pass());
                    assert!(ncf::properties::morphism_pullback_check(&inclusion));
                }
            }
        }
    }
}

/// Every witness-producing path preserves the invariant fingerprint, so the
/// signature pruning in the search can never cut off a real isomorphism.
#[test]
fn signatures_are_isomorphism_invariant() {
    let pool = build_pool();
    let mut witnessed = 0;
    for m in &pool.morphisms {
        if let Ok(witness) = m.invert() {
            assert_eq!(
                ncf::morphism::signature(witness.forward().source()),
                ncf::morphism::signature(witness.forward().target())
            );
            witnessed += 1;
        }
    }
    assert!(witnessed > 0);
}

#[test]
fn one_player_wrapping_preserves_isomorphism_classes() {
    // Spot check on the six-node universe that distinct preform
    // representatives stay distinct as one-player forms.
    let preforms = enumerate_preforms(4).expect("bound ok");
    let wrapped: Vec<Form> = preforms.iter().map(Form::one_player).collect();
    for (i, a) in wrapped.iter().enumerate() {
        for (j, b) in wrapped.iter().enumerate() {
            assert_eq!(find_isomorphism(a, b).is_ok(), i == j);
        }
    }
    let map: BTreeMap<usize, usize> = (0..wrapped.len()).map(|i| (i, i)).collect();
    assert_eq!(map.len(), wrapped.len());
}

#[test]
fn composing_two_renames_equals_the_direct_rename() {
    let base = simultaneous_form();
    let spec_to_atoms = ncf::transport::TransportSpec {
        player_bij: base.players().map(|p| (p.clone(), p.clone())).collect(),
        node_bij: base
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), NodeValue::Atom(label(&format!("v{i}")))))
            .collect(),
        choice_bij: base.choices().iter().map(|c| (c.clone(), c.clone())).collect(),
    };
    let (mid, first) = ncf::transport::transport_form(&base, &spec_to_atoms).unwrap();
    let spec_to_hash = ncf::transport::TransportSpec {
        player_bij: mid.players().map(|p| (p.clone(), p.clone())).collect(),
        node_bij: mid
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), NodeValue::Atom(label(&format!("w{i}")))))
            .collect(),
        choice_bij: mid.choices().iter().map(|c| (c.clone(), c.clone())).collect(),
    };
    let (far, second) = ncf::transport::transport_form(&mid, &spec_to_hash).unwrap();

    let composed =
        FormMorphism::compose(second.forward(), first.forward()).expect("composable");
    let direct_nodes: BTreeMap<NodeValue, NodeValue> = base
        .nodes()
        .iter()
        .map(|n| {
            let through = &spec_to_hash.node_bij[&spec_to_atoms.node_bij[n]];
            (n.clone(), through.clone())
        })
        .collect();
    let direct = FormMorphism::validate(
        base.clone(),
        far.clone(),
        base.players().map(|p| (p.clone(), p.clone())).collect(),
        direct_nodes,
        base.choices().iter().map(|c| (c.clone(), c.clone())).collect(),
    )
    .expect("direct rename is a morphism");
    assert_eq!(composed, direct);
}


#[test]
fn vacuous_players_restrict_to_empty_bijections() {
    // An isomorphism between forms carrying a vacuous player on both sides:
    // the per-player items hold with empty restrictions.
    let pf = simultaneous_preform();
    let with_vacuous = Form::validate(
        [
            (label("1"), [label("a"), label("b")].into()),
            (label("2"), [label("c"), label("d")].into()),
            (label("3"), BTreeSet::new()),
        ],
        pf.nodes().iter().cloned(),
        pf.edges().iter().cloned(),
    )
    .expect("vacuous players are legal");
    let spec = random_transport_spec(&with_vacuous, 99);
    let (image, witness) = ncf::transport::transport_form(&with_vacuous, &spec).unwrap();
    assert_eq!(image.player_count(), 3);
    let report = ncf::morphism::isomorphism_consequences(&witness);
    assert!(report.all_pass(), "{report}");
    // The search path also handles the vacuous player, matching it in order.
    let found = find_isomorphism(&with_vacuous, &image).expect("isomorphic");
    assert!(found.forward().is_isomorphism());
}

#[test]
fn simultaneous_form_class_appears_in_the_seven_node_two_player_universe() {
    let target = simultaneous_form();
    let universe = enumerate_forms(7, 2).expect("bound ok");
    let hit = universe
        .iter()
        .filter(|f| f.nodes().len() == 7)
        .filter(|f| ncf::morphism::signature(f) == ncf::morphism::signature(&target))
        .any(|f| find_isomorphism(f, &target).is_ok());
    assert!(hit, "the two-player simultaneous class must be enumerated");
}

#[test]
fn enumeration_is_deterministic_across_runs() {
    assert_eq!(
        enumerate_preforms(5).expect("bound ok"),
        enumerate_preforms(5).expect("bound ok")
    );
    assert_eq!(
        enumerate_forms(5, 5).expect("bound ok"),
        enumerate_forms(5, 5).expect("bound ok")
    );
    let universe = subcategory_universe(sub("CsetF"), 5).expect("bound ok");
    assert_eq!(universe, subcategory_universe(sub("CsetF"), 5).expect("bound ok"));
}
