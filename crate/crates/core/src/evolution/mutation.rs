//! Commonsense mutation operators.
//!
//! Each primitive edits a network in place and returns `false`, leaving it
//! untouched, when it is not applicable to that network.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::Serialize;

use crate::concept::{Concept, Relation};
use crate::kb::KnowledgeBase;
use crate::semnet::SemanticNetwork;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum MutationKind {
    /// I: attach a new concept through a KB relation.
    AttachConcept,
    /// IIa: add a KB relation between two existing concepts.
    AddRelation,
    /// IIb: delete a relation.
    DeleteRelation,
    /// IIIa: add a new concept as its own cluster.
    AddIsolatedConcept,
    /// IIIb: delete a concept and its relations.
    DeleteConcept,
    /// IV: replace a concept by an interchangeable one.
    ReplaceConcept,
}

impl MutationKind {
    pub const ALL: [MutationKind; 6] = [
        MutationKind::AttachConcept,
        MutationKind::AddRelation,
        MutationKind::DeleteRelation,
        MutationKind::AddIsolatedConcept,
        MutationKind::DeleteConcept,
        MutationKind::ReplaceConcept,
    ];

    pub fn apply<R: Rng + ?Sized>(
        self,
        net: &mut SemanticNetwork,
        kb: &KnowledgeBase,
        min_shared: usize,
        rng: &mut R,
    ) -> bool {
        match self {
            MutationKind::AttachConcept => attach_concept(net, kb, rng),
            MutationKind::AddRelation => add_relation_between_existing(net, kb, rng),
            MutationKind::DeleteRelation => delete_relation(net, rng),
            MutationKind::AddIsolatedConcept => add_isolated_concept(net, kb, rng),
            MutationKind::DeleteConcept => delete_concept(net, rng),
            MutationKind::ReplaceConcept => replace_concept(net, kb, min_shared, rng),
        }
    }
}

/// Apply one uniformly chosen mutation type, redrawing the type whenever the
/// drawn one is not applicable, for at most `timeout` draws. Returns the
/// applied type, or `None` with `parent` unchanged.
pub fn mutate<R: Rng + ?Sized>(
    parent: &SemanticNetwork,
    kb: &KnowledgeBase,
    timeout: usize,
    min_shared: usize,
    rng: &mut R,
) -> (SemanticNetwork, Option<MutationKind>) {
    let mut child = parent.clone();
    for _ in 0..timeout {
        let kind = MutationKind::ALL[rng.gen_range(0..MutationKind::ALL.len())];
        if kind.apply(&mut child, kb, min_shared, rng) {
            return (child, Some(kind));
        }
    }
    (child, None)
}

fn pick<'a, T, R: Rng + ?Sized>(items: &'a [T], rng: &mut R) -> &'a T {
    &items[rng.gen_range(0..items.len())]
}

/// Type I. The new concept is drawn uniformly among attachable concepts,
/// then one of its linking relations uniformly.
pub fn attach_concept<R: Rng + ?Sized>(
    net: &mut SemanticNetwork,
    kb: &KnowledgeBase,
    rng: &mut R,
) -> bool {
    let mut by_concept: BTreeMap<Concept, Vec<Relation>> = BTreeMap::new();
    for (r, c) in kb.attachable_concepts(net) {
        by_concept.entry(c).or_default().push(r);
    }
    if by_concept.is_empty() {
        return false;
    }
    let options: Vec<(Concept, Vec<Relation>)> = by_concept.into_iter().collect();
    let (_, rels) = pick(&options, rng);
    let r = pick(rels, rng).clone();
    net.add_relation_triple(r)
        .expect("KB relations are not self-loops")
}

/// KB relations between two concepts of `net` that `net` lacks.
pub fn missing_internal_relations(net: &SemanticNetwork, kb: &KnowledgeBase) -> Vec<Relation> {
    let mut out = BTreeSet::new();
    for c in net.concepts() {
        for r in kb.assertions_involving(c) {
            let other = r.other(c).expect("indexed relation involves its key");
            if net.contains_concept(other) && !net.contains_relation(r) {
                out.insert(r.clone());
            }
        }
    }
    out.into_iter().collect()
}

/// Type IIa.
pub fn add_relation_between_existing<R: Rng + ?Sized>(
    net: &mut SemanticNetwork,
    kb: &KnowledgeBase,
    rng: &mut R,
) -> bool {
    let candidates = missing_internal_relations(net, kb);
    if candidates.is_empty() {
        return false;
    }
    let r = pick(&candidates, rng).clone();
    net.add_relation_triple(r)
        .expect("KB relations are not self-loops")
}

/// Type IIb.
pub fn delete_relation<R: Rng + ?Sized>(net: &mut SemanticNetwork, rng: &mut R) -> bool {
    if net.size() == 0 {
        return false;
    }
    let r = net
        .relations()
        .nth(rng.gen_range(0..net.size()))
        .cloned()
        .expect("in range");
    net.remove_relation(&r)
}

const REJECTION_TRIES: usize = 32;

/// Type IIIa. Draws uniformly among KB concepts absent from `net`.
pub fn add_isolated_concept<R: Rng + ?Sized>(
    net: &mut SemanticNetwork,
    kb: &KnowledgeBase,
    rng: &mut R,
) -> bool {
    let all = kb.concepts();
    if all.is_empty() {
        return false;
    }
    for _ in 0..REJECTION_TRIES {
        let c = pick(all, rng);
        if !net.contains_concept(c) {
            return net.add_concept(c.clone());
        }
    }
    let absent: Vec<&Concept> = all.iter().filter(|c| !net.contains_concept(c)).collect();
    if absent.is_empty() {
        return false;
    }
    let c = (*pick(&absent, rng)).clone();
    net.add_concept(c)
}

/// Type IIIb.
pub fn delete_concept<R: Rng + ?Sized>(net: &mut SemanticNetwork, rng: &mut R) -> bool {
    if net.is_empty() {
        return false;
    }
    let c = net
        .concepts()
        .nth(rng.gen_range(0..net.concept_count()))
        .cloned()
        .expect("in range");
    net.remove_concept(&c).is_ok()
}

/// Concepts of `net` with their interchangeable KB concepts not already in
/// `net`; only concepts with at least one replacement are listed.
pub fn replacement_options(
    net: &SemanticNetwork,
    kb: &KnowledgeBase,
    min_shared: usize,
) -> Vec<(Concept, Vec<Concept>)> {
    net.concepts()
        .filter_map(|a| {
            let rels = net.relations_of(a);
            if rels.is_empty() {
                return None;
            }
            let subs: Vec<Concept> = kb
                .interchangeable_concepts(a, &rels, min_shared)
                .into_iter()
                .filter(|b| !net.contains_concept(b))
                .collect();
            (!subs.is_empty()).then(|| (a.clone(), subs))
        })
        .collect()
}

/// Replace `old` by `new`, keeping rewritten relations the KB supports and
/// deleting the rest.
pub fn replace_with(net: &mut SemanticNetwork, kb: &KnowledgeBase, old: &Concept, new: &Concept) {
    let rels = net
        .remove_concept(old)
        .expect("replaced concept is present");
    net.add_concept(new.clone());
    for r in rels {
        let moved = r.substitute(old, new);
        if kb.contains(&moved) {
            net.add_relation_triple(moved)
                .expect("KB relations are not self-loops");
        }
    }
}

/// Type IV.
pub fn replace_concept<R: Rng + ?Sized>(
    net: &mut SemanticNetwork,
    kb: &KnowledgeBase,
    min_shared: usize,
    rng: &mut R,
) -> bool {
    let options = replacement_options(net, kb, min_shared);
    if options.is_empty() {
        return false;
    }
    let (old, subs) = pick(&options, rng);
    let new = pick(subs, rng).clone();
    replace_with(net, kb, &old.clone(), &new);
    true
}
