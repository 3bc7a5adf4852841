//! No-absentmindedness and perfect-information: predicates with
//! deterministic counterexample witnesses, the five-way characterization of
//! no-absentmindedness for choice-sequence preforms, and the invariance
//! checks used against isomorphisms and morphisms.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::form::Form;
use crate::morphism::{FormMorphism, IsoWitness};
use crate::node::{fmt_nodes, NodeValue};
use crate::preform::{InfoSet, Preform};
use crate::styles::{is_choice_sequence_preform, StyleViolation};

/// The two isomorphically invariant properties tracked by this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PropertyId {
    NoAbsentmindedness,
    PerfectInformation,
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyId::NoAbsentmindedness => f.write_str("no-absentmindedness"),
            PropertyId::PerfectInformation => f.write_str("perfect-information"),
        }
    }
}

impl FromStr for PropertyId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "no-absentmindedness" => Ok(PropertyId::NoAbsentmindedness),
            "perfect-information" => Ok(PropertyId::PerfectInformation),
            other => Err(format!(
                "unknown property {other:?} (expected no-absentmindedness or perfect-information)"
            )),
        }
    }
}

/// A property either holds or fails with a concrete witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropertyCheck<W> {
    Holds,
    Fails(W),
}

impl<W> PropertyCheck<W> {
    pub fn holds(&self) -> bool {
        matches!(self, PropertyCheck::Holds)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            PropertyCheck::Holds => None,
            PropertyCheck::Fails(w) => Some(w),
        }
    }

    pub fn map<V>(self, f: impl FnOnce(W) -> V) -> PropertyCheck<V> {
        match self {
            PropertyCheck::Holds => PropertyCheck::Holds,
            PropertyCheck::Fails(w) => PropertyCheck::Fails(f(w)),
        }
    }
}

/// An information set containing two of its nodes in strict precedence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbsentmindednessWitness {
    pub info_set: InfoSet,
    pub earlier: NodeValue,
    pub later: NodeValue,
}

impl fmt::Display for AbsentmindednessWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "information set {{{}}} contains {} strictly before {}",
            fmt_nodes(&self.info_set),
            self.earlier,
            self.later
        )
    }
}

/// An information set with at least two nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImperfectInformationWitness {
    pub info_set: InfoSet,
}

impl fmt::Display for ImperfectInformationWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "information set {{{}}} has {} nodes",
            fmt_nodes(&self.info_set),
            self.info_set.len()
        )
    }
}

/// Whichever counterexample the checked property produces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropertyWitness {
    Absentmindedness(AbsentmindednessWitness),
    ImperfectInformation(ImperfectInformationWitness),
}

impl fmt::Display for PropertyWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyWitness::Absentmindedness(w) => w.fmt(f),
            PropertyWitness::ImperfectInformation(w) => w.fmt(f),
        }
    }
}

/// True iff no information set contains two nodes in strict precedence. The
/// failing witness is deterministic: information sets are scanned in
/// canonical order, node pairs in (stage, node) order.
pub fn no_absentmindedness(pf: &Preform) -> PropertyCheck<AbsentmindednessWitness> {
    let derived = pf.derived();
    for info_set in &derived.info_sets {
        let mut members: Vec<&NodeValue> = info_set.iter().collect();
        members.sort_by_key(|n| (derived.tree.stage[*n], (*n).clone()));
        for (i, earlier) in members.iter().enumerate() {
            for later in &members[i + 1..] {
                if derived
                    .tree
                    .strict_prec
                    .contains(&((*earlier).clone(), (*later).clone()))
                {
                    return PropertyCheck::Fails(AbsentmindednessWitness {
                        info_set: info_set.clone(),
                        earlier: (*earlier).clone(),
                        later: (*later).clone(),
                    });
                }
            }
        }
    }
    PropertyCheck::Holds
}

/// True iff every information set is a singleton.
pub fn perfect_information(pf: &Preform) -> PropertyCheck<ImperfectInformationWitness> {
    for info_set in &pf.derived().info_sets {
        if info_set.len() >= 2 {
            return PropertyCheck::Fails(ImperfectInformationWitness {
                info_set: info_set.clone(),
            });
        }
    }
    PropertyCheck::Holds
}

pub fn preform_property(pf: &Preform, id: PropertyId) -> PropertyCheck<PropertyWitness> {
    match id {
        PropertyId::NoAbsentmindedness => {
            no_absentmindedness(pf).map(PropertyWitness::Absentmindedness)
        }
        PropertyId::PerfectInformation => {
            perfect_information(pf).map(PropertyWitness::ImperfectInformation)
        }
    }
}

/// A form has a property iff its preform does.
pub fn form_property(form: &Form, id: PropertyId) -> PropertyCheck<PropertyWitness> {
    preform_property(form.preform(), id)
}

/// The five equivalent characterizations of no-absentmindedness for a
/// choice-sequence preform:
///
/// 1. no information set contains two nodes in strict precedence;
/// 2. no member of an information set is a proper initial segment of another
///    member of the same set;
/// 3. within any node, at most one position carries a choice feasible over
///    any given information set;
/// 4. every node has as many distinct items as positions;
/// 5. taking ranges is injective on the node set.
///
/// The five answers agree on every valid choice-sequence preform; the sweep
/// asserting so lives in the test suite.
pub fn csq_no_absentmindedness_criteria(pf: &Preform) -> Result<[bool; 5], StyleViolation> {
    is_choice_sequence_preform(pf)?;
    let derived = pf.derived();

    let a = no_absentmindedness(pf).holds();

    let b = derived.info_sets.iter().all(|set| {
        set.iter().all(|member| {
            let seq = member.as_seq().expect("sequence style");
            (0..seq.len()).all(|l| {
                let prefix = NodeValue::Seq(seq.initial_segment(l).expect("within length"));
                !set.contains(&prefix)
            })
        })
    });

    let c = pf.nodes().iter().all(|node| {
        let seq = node.as_seq().expect("sequence style");
        derived.info_sets.iter().all(|set| {
            let feasible = pf.feasible_over(set);
            seq.items().iter().filter(|item| feasible.contains(*item)).count() <= 1
        })
    });

    let d = pf.nodes().iter().all(|node| {
        let seq = node.as_seq().expect("sequence style");
        seq.range().len() == seq.len()
    });

    let e = {
        let ranges: BTreeSet<_> = pf
            .nodes()
            .iter()
            .map(|n| n.as_seq().expect("sequence style").range())
            .collect();
        ranges.len() == pf.nodes().len()
    };

    Ok([a, b, c, d, e])
}

/// True iff the two ends of an isomorphism agree on the property. Agreement
/// is a theorem, so a `false` return signals an implementation bug.
pub fn check_invariance(id: PropertyId, witness: &IsoWitness) -> bool {
    let source = form_property(witness.forward().source(), id).holds();
    let target = form_property(witness.forward().target(), id).holds();
    source == target
}

/// No-absentmindedness pulls back along any morphism: if the target has it,
/// so does the source. Must hold for every morphism.
pub fn morphism_pullback_check(m: &FormMorphism) -> bool {
    let target_has = form_property(m.target(), PropertyId::NoAbsentmindedness).holds();
    let source_has = form_property(m.source(), PropertyId::NoAbsentmindedness).holds();
    !(target_has && !source_has)
}
