//! Commonsense crossover.
//!
//! Subgraph crossover swaps the parts of two parents that are specific to a
//! pair of interchangeable concepts. When no such pair exists the parents
//! are merged instead, bridged by one knowledge base relation if possible.

use std::collections::BTreeSet;

use rand::Rng;

use crate::concept::{Concept, Relation};
use crate::kb::KnowledgeBase;
use crate::semnet::{extract_crossover_subgraph, RelationPattern, SemanticNetwork, Subgraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CrossoverKind {
    Subgraph,
    Merge,
}

/// Result of a subgraph exchange, kept for inspection.
#[derive(Debug, Clone)]
pub struct SubgraphExchange {
    pub offspring: (SemanticNetwork, SemanticNetwork),
    pub roots: (Concept, Concept),
    pub subgraphs: (Subgraph, Subgraph),
}

/// All (concept of `p1`, concept of `p2`) pairs that are interchangeable
/// given their relations in their own networks.
pub fn interchangeable_pairs(
    p1: &SemanticNetwork,
    p2: &SemanticNetwork,
    kb: &KnowledgeBase,
    min_shared: usize,
) -> Vec<(Concept, Concept)> {
    let rels2: Vec<(&Concept, Vec<Relation>)> = p2
        .concepts()
        .map(|b| (b, p2.relations_of(b)))
        .filter(|(_, rels)| !rels.is_empty())
        .collect();
    let mut pairs = Vec::new();
    for a in p1.concepts() {
        let rels_a = p1.relations_of(a);
        if rels_a.is_empty() {
            continue;
        }
        for (b, rels_b) in &rels2 {
            if kb.interchangeable_min(a, &rels_a, b, rels_b, min_shared) {
                pairs.push((a.clone(), (*b).clone()));
            }
        }
    }
    pairs
}

/// Patterns of `root`'s relations that stay KB-backed with `other` in
/// `root`'s place.
fn common_patterns(
    net: &SemanticNetwork,
    root: &Concept,
    other: &Concept,
    kb: &KnowledgeBase,
) -> BTreeSet<RelationPattern> {
    net.relations_of(root)
        .iter()
        .filter(|r| kb.contains(&r.substitute(root, other)))
        .filter_map(|r| RelationPattern::of(r, root))
        .collect()
}

/// Replace `own`'s subgraph in `host` with `donor`, whose root takes the
/// place of `own.root` in the relations left behind.
fn transplant(host: &SemanticNetwork, own: &Subgraph, donor: &Subgraph) -> SemanticNetwork {
    let removed: BTreeSet<&Concept> = own.concepts.iter().filter(|c| **c != own.root).collect();
    let mut out = SemanticNetwork::new();
    for c in host.concepts() {
        if c != &own.root && !removed.contains(c) {
            out.add_concept(c.clone());
        }
    }
    for r in host.relations() {
        if removed.contains(&r.head) || removed.contains(&r.tail) {
            continue;
        }
        let r = if r.involves(&own.root) {
            r.substitute(&own.root, &donor.root)
        } else {
            r.clone()
        };
        // Kept root relations are KB substitutions, so never self-loops.
        let _ = out.add_relation_triple(r);
    }
    out.add_concept(donor.root.clone());
    for c in &donor.concepts {
        out.add_concept(c.clone());
    }
    for r in &donor.relations {
        out.add_relation_triple(r.clone())
            .expect("subgraph relations are not self-loops");
    }
    out
}

/// Subgraph crossover on a uniformly chosen interchangeable pair, or `None`
/// when the parents have no such pair.
pub fn crossover_type1<R: Rng + ?Sized>(
    p1: &SemanticNetwork,
    p2: &SemanticNetwork,
    kb: &KnowledgeBase,
    min_shared: usize,
    rng: &mut R,
) -> Option<SubgraphExchange> {
    let pairs = interchangeable_pairs(p1, p2, kb, min_shared);
    if pairs.is_empty() {
        return None;
    }
    let (a, b) = pairs[rng.gen_range(0..pairs.len())].clone();
    Some(exchange_at(p1, p2, &a, &b, kb))
}

/// Subgraph exchange at a given crossover pair.
pub fn exchange_at(
    p1: &SemanticNetwork,
    p2: &SemanticNetwork,
    a: &Concept,
    b: &Concept,
    kb: &KnowledgeBase,
) -> SubgraphExchange {
    let sub1 = extract_crossover_subgraph(p1, a, &common_patterns(p1, a, b, kb));
    let sub2 = extract_crossover_subgraph(p2, b, &common_patterns(p2, b, a, kb));
    let o1 = transplant(p1, &sub1, &sub2);
    let o2 = transplant(p2, &sub2, &sub1);
    SubgraphExchange {
        offspring: (o1, o2),
        roots: (a.clone(), b.clone()),
        subgraphs: (sub1, sub2),
    }
}

/// KB relations linking a concept found only in `p1` to one found only in
/// `p2`, in either direction.
pub fn merge_attachments(
    p1: &SemanticNetwork,
    p2: &SemanticNetwork,
    kb: &KnowledgeBase,
) -> Vec<Relation> {
    let mut out = BTreeSet::new();
    for c in p1.concepts().filter(|c| !p2.contains_concept(c)) {
        for r in kb.assertions_involving(c) {
            let other = r.other(c).expect("indexed relation involves its key");
            if p2.contains_concept(other) && !p1.contains_concept(other) {
                out.insert(r.clone());
            }
        }
    }
    out.into_iter().collect()
}

/// Graph-merging crossover: each offspring is the union of the parents plus
/// one independently drawn bridging relation, or the bare union when no
/// bridge exists.
pub fn crossover_type2<R: Rng + ?Sized>(
    p1: &SemanticNetwork,
    p2: &SemanticNetwork,
    kb: &KnowledgeBase,
    rng: &mut R,
) -> (SemanticNetwork, SemanticNetwork) {
    let union = p1.union(p2);
    let bridges = merge_attachments(p1, p2, kb);
    let mut offspring = || {
        let mut o = union.clone();
        if !bridges.is_empty() {
            let r = bridges[rng.gen_range(0..bridges.len())].clone();
            o.add_relation_triple(r)
                .expect("KB relations are not self-loops");
        }
        o
    };
    let o1 = offspring();
    let o2 = offspring();
    (o1, o2)
}

/// Subgraph crossover when possible, graph merging otherwise.
pub fn crossover<R: Rng + ?Sized>(
    p1: &SemanticNetwork,
    p2: &SemanticNetwork,
    kb: &KnowledgeBase,
    min_shared: usize,
    rng: &mut R,
) -> (SemanticNetwork, SemanticNetwork, CrossoverKind) {
    match crossover_type1(p1, p2, kb, min_shared, rng) {
        Some(x) => (x.offspring.0, x.offspring.1, CrossoverKind::Subgraph),
        None => {
            let (o1, o2) = crossover_type2(p1, p2, kb, rng);
            (o1, o2, CrossoverKind::Merge)
        }
    }
}
