//! Plain-text reports with stable ordering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use ncf::formio::Document;
use ncf::morphism::FormMorphism;
use ncf::node::{Label, NodeValue};
use ncf::oracle::{EnclosureMethod, EnclosureResult};
use ncf::preform::PreformDerived;
use ncf::tree::Chain;

fn node_list(nodes: impl IntoIterator<Item = NodeValue>) -> String {
    nodes
        .into_iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn push_preform_sections(out: &mut String, derived: &PreformDerived) {
    writeln!(out, "root: {}", derived.root).expect("write to string");
    let mut staged: Vec<(&NodeValue, &usize)> = derived.tree.stage.iter().collect();
    staged.sort_by_key(|(node, stage)| (**stage, (*node).clone()));
    for (node, stage) in staged {
        writeln!(out, "stage: {node} {stage}").expect("write to string");
    }
    writeln!(
        out,
        "decision-nodes: {}",
        node_list(derived.decision_nodes.iter().cloned())
    )
    .expect("write to string");
    for info_set in &derived.info_sets {
        writeln!(out, "info-set: {}", node_list(info_set.iter().cloned()))
            .expect("write to string");
    }
}

fn push_chains(out: &mut String, chains: impl IntoIterator<Item = Chain>) {
    for chain in chains {
        writeln!(out, "chain: {}", node_list(chain)).expect("write to string");
    }
}

/// The derived-entity report: root, stages, decision nodes, information
/// sets, per-player sections for forms, strict precedence pairs, and the
/// finite maximal chains.
pub fn derive_report(doc: &Document) -> String {
    let mut out = String::new();
    match doc {
        Document::Preform(p) => {
            out.push_str("kind: preform\n");
            push_preform_sections(&mut out, p.derived());
            for (a, b) in &p.derived().tree.strict_prec {
                writeln!(out, "prec: {a} {b}").expect("write to string");
            }
            push_chains(&mut out, p.derived().tree.chains_finite.iter().cloned());
        }
        Document::Form(f) => {
            out.push_str("kind: form\n");
            push_preform_sections(&mut out, f.preform_derived());
            for (player, nodes) in &f.derived().player_nodes {
                writeln!(out, "player {player} nodes: {}", node_list(nodes.iter().cloned()))
                    .expect("write to string");
            }
            for (player, sets) in &f.derived().player_info_sets {
                for info_set in sets {
                    writeln!(
                        out,
                        "player {player} info-set: {}",
                        node_list(info_set.iter().cloned())
                    )
                    .expect("write to string");
                }
            }
            for (a, b) in &f.preform_derived().tree.strict_prec {
                writeln!(out, "prec: {a} {b}").expect("write to string");
            }
            push_chains(&mut out, f.preform_derived().tree.chains_finite.iter().cloned());
        }
    }
    out
}

/// The witness mapping tables: `players:`, `nodes:`, `choices:` sections
/// with one `<from> -> <to>` pair per line, sorted by source.
pub fn witness_tables(
    players: &BTreeMap<Label, Label>,
    nodes: &BTreeMap<NodeValue, NodeValue>,
    choices: &BTreeMap<Label, Label>,
) -> String {
    let mut out = String::from("players:\n");
    for (from, to) in players {
        writeln!(out, "{from} -> {to}").expect("write to string");
    }
    out.push_str("nodes:\n");
    for (from, to) in nodes {
        writeln!(out, "{from} -> {to}").expect("write to string");
    }
    out.push_str("choices:\n");
    for (from, to) in choices {
        writeln!(out, "{from} -> {to}").expect("write to string");
    }
    out
}

pub fn form_witness_tables(m: &FormMorphism) -> String {
    witness_tables(m.player_map(), m.node_map(), m.choice_map())
}

/// The enclosure report: claim, universe size, per-method tallies, and the
/// counterexample with its exhaustiveness certificate when refuted.
pub fn enclosure_report(result: &EnclosureResult) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "enclosure: {} -> {} (nodes <= {})",
        result.from, result.to, result.node_bound
    )
    .expect("write to string");
    writeln!(out, "objects checked: {}", result.objects_checked).expect("write to string");
    let mut member = 0;
    let mut constructed = 0;
    let mut found = 0;
    for outcome in &result.outcomes {
        match outcome.method {
            EnclosureMethod::Member => member += 1,
            EnclosureMethod::Constructed => constructed += 1,
            EnclosureMethod::Found { .. } => found += 1,
        }
    }
    writeln!(out, "by membership: {member}").expect("write to string");
    writeln!(out, "by construction: {constructed}").expect("write to string");
    writeln!(out, "by search: {found}").expect("write to string");
    writeln!(out, "verified: {}", result.verified).expect("write to string");
    if let Some(counterexample) = &result.counterexample {
        writeln!(out, "counterexample ({}):", counterexample.certificate)
            .expect("write to string");
        out.push_str(&counterexample.object);
    }
    out
}
