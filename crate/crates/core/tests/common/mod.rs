//! Fixtures and independent oracles shared by integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use memenet::evolution::mutate;
use memenet::{
    grow_random, load_kb, Concept, KnowledgeBase, Relation, ScoreWeights, SemanticNetwork,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

pub fn mini_kb() -> KnowledgeBase {
    load_kb(data_path("mini_kb.tsv"), 2.0).expect("bundled knowledge base loads")
}

pub fn network(name: &str) -> SemanticNetwork {
    let text = std::fs::read_to_string(data_path(name)).expect("bundled network exists");
    SemanticNetwork::from_json(&text).expect("bundled network parses")
}

/// A random KB-backed network with `min_relations..=max_relations`
/// relations (fewer if the concept budget runs out) and at most
/// `max_concepts` concepts, grown by following KB assertions outward from
/// random concepts.
pub fn random_kb_network<R: Rng>(
    kb: &KnowledgeBase,
    min_relations: usize,
    max_relations: usize,
    max_concepts: usize,
    rng: &mut R,
) -> SemanticNetwork {
    grow_network(kb, None, min_relations, max_relations, max_concepts, rng)
}

/// Like [`random_kb_network`], but relations carrying one of the labels of
/// `like` are preferred, so the result tends to share structure with it.
pub fn label_aligned_network<R: Rng>(
    kb: &KnowledgeBase,
    like: &SemanticNetwork,
    max_relations: usize,
    max_concepts: usize,
    rng: &mut R,
) -> SemanticNetwork {
    let labels: BTreeSet<&str> = like.relations().map(|r| r.label.as_str()).collect();
    grow_network(kb, Some(&labels), 1, max_relations, max_concepts, rng)
}

fn grow_network<R: Rng>(
    kb: &KnowledgeBase,
    labels: Option<&BTreeSet<&str>>,
    min_relations: usize,
    max_relations: usize,
    max_concepts: usize,
    rng: &mut R,
) -> SemanticNetwork {
    let mut net = SemanticNetwork::new();
    let target = rng.gen_range(min_relations..=max_relations);
    let mut attempts = 0;
    while net.size() < target && attempts < 500 {
        attempts += 1;
        let anchor = if net.concept_count() == 0 || rng.gen_bool(0.15) {
            kb.random_concept(rng).expect("non-empty kb")
        } else {
            let cs: Vec<&Concept> = net.concepts().collect();
            (*cs.choose(rng).unwrap()).clone()
        };
        let all = kb.assertions_involving(&anchor);
        let preferred: Vec<&Relation> = match labels {
            Some(ls) => all
                .iter()
                .filter(|r| ls.contains(r.label.as_str()))
                .collect(),
            None => Vec::new(),
        };
        let pick = if preferred.is_empty() || rng.gen_bool(0.2) {
            all.choose(rng)
        } else {
            preferred.choose(rng).copied()
        };
        let Some(r) = pick else {
            continue;
        };
        let fresh = [&r.head, &r.tail]
            .iter()
            .filter(|c| !net.contains_concept(c))
            .count();
        if net.concept_count() + fresh > max_concepts {
            continue;
        }
        net.add_relation_triple(r.clone()).unwrap();
    }
    net
}

/// A KB-backed network that imitates `like`: each relation of `like` is
/// replaced, when the KB allows, by a same-label assertion whose arguments
/// agree with the images chosen so far. A few unrelated assertions are
/// then attached as noise.
pub fn analog_network<R: Rng>(
    kb: &KnowledgeBase,
    like: &SemanticNetwork,
    max_concepts: usize,
    rng: &mut R,
) -> SemanticNetwork {
    let mut image: BTreeMap<Concept, Concept> = BTreeMap::new();
    let mut net = SemanticNetwork::new();
    let mut order: Vec<&Relation> = like.relations().collect();
    order.shuffle(rng);
    for r in order {
        if rng.gen_bool(0.15) {
            continue;
        }
        let (h, t) = (image.get(&r.head).cloned(), image.get(&r.tail).cloned());
        let fits = |c: &Relation| {
            let head_ok = match &h {
                Some(x) => &c.head == x,
                None => !net.contains_concept(&c.head),
            };
            let tail_ok = match &t {
                Some(x) => &c.tail == x,
                None => !net.contains_concept(&c.tail),
            };
            c.label == r.label && head_ok && tail_ok
        };
        let candidates: Vec<Relation> = match (&h, &t) {
            (Some(x), _) => kb
                .assertions_involving(x)
                .iter()
                .filter(|c| fits(c))
                .cloned()
                .collect(),
            (None, Some(y)) => kb
                .assertions_involving(y)
                .iter()
                .filter(|c| fits(c))
                .cloned()
                .collect(),
            (None, None) => kb
                .assertions()
                .map(|a| a.relation)
                .filter(|c| fits(c))
                .collect(),
        };
        let Some(pick) = candidates.choose(rng) else {
            continue;
        };
        let fresh = [&pick.head, &pick.tail]
            .iter()
            .filter(|c| !net.contains_concept(c))
            .count();
        if net.concept_count() + fresh > max_concepts {
            continue;
        }
        image.insert(r.head.clone(), pick.head.clone());
        image.insert(r.tail.clone(), pick.tail.clone());
        net.add_relation_triple(pick.clone()).unwrap();
    }
    for _ in 0..rng.gen_range(0..=2) {
        let cs: Vec<Concept> = net.concepts().cloned().collect();
        let Some(anchor) = cs.choose(rng) else {
            break;
        };
        if let Some(r) = kb.assertions_involving(anchor).choose(rng) {
            let fresh = [&r.head, &r.tail]
                .iter()
                .filter(|c| !net.contains_concept(c))
                .count();
            if net.concept_count() + fresh <= max_concepts && net.size() < 6 {
                net.add_relation_triple(r.clone()).unwrap();
            }
        }
    }
    net
}

/// A pair of small KB-backed networks (at most 6 relations and 8 concepts
/// each). The base is random; the target is independent of it, grown with
/// a preference for its labels, or built as a structural imitation of it.
pub fn random_pair<R: Rng>(kb: &KnowledgeBase, rng: &mut R) -> (SemanticNetwork, SemanticNetwork) {
    if rng.gen_bool(0.25) {
        let bundled = [network("astronomy.json"), network("family.json")];
        let a = random_subnetwork(bundled.choose(rng).unwrap(), 6, 8, rng);
        let b = random_subnetwork(bundled.choose(rng).unwrap(), 6, 8, rng);
        return (a, b);
    }
    let base = random_kb_network(kb, 3, 6, 8, rng);
    let target = match rng.gen_range(0..3) {
        0 => random_kb_network(kb, 1, 6, 8, rng),
        1 => label_aligned_network(kb, &base, 6, 8, rng),
        _ => analog_network(kb, &base, 8, rng),
    };
    (base, target)
}

/// A random subset of the relations of `net` within the given bounds.
pub fn random_subnetwork<R: Rng>(
    net: &SemanticNetwork,
    max_relations: usize,
    max_concepts: usize,
    rng: &mut R,
) -> SemanticNetwork {
    let mut rels: Vec<&Relation> = net.relations().collect();
    rels.shuffle(rng);
    let mut out = SemanticNetwork::new();
    let want = rng.gen_range(1..=max_relations);
    for r in rels {
        if out.size() == want {
            break;
        }
        let fresh = [&r.head, &r.tail]
            .iter()
            .filter(|c| !out.contains_concept(c))
            .count();
        if out.concept_count() + fresh <= max_concepts {
            out.add_relation_triple(r.clone()).unwrap();
        }
    }
    out
}

/// A random KB-valid network from initialization followed by a few
/// mutations, so that networks of varied size and shape appear.
pub fn random_individual<R: Rng>(kb: &KnowledgeBase, rng: &mut R) -> SemanticNetwork {
    let mut net = grow_random(kb, &[], rng.gen_range(2..=6), 10, rng).unwrap();
    for _ in 0..rng.gen_range(0..6) {
        net = mutate(&net, kb, 10, 1, rng).0;
    }
    net
}

/// Best score over every injective partial concept mapping from `base`
/// to `target`, with the matched set taken as all same-label relation pairs
/// whose arguments the mapping aligns. Returns (score, matched count).
pub fn oracle_best(
    base: &SemanticNetwork,
    target: &SemanticNetwork,
    w: &ScoreWeights,
) -> (f64, usize) {
    let base_rels: Vec<&Relation> = base.relations().collect();
    let target_rels: Vec<&Relation> = target.relations().collect();
    let base_concepts: Vec<&Concept> = base.concepts().collect();
    let target_concepts: Vec<&Concept> = target.concepts().collect();

    // Images worth trying for each base concept; any other image matches
    // no relation and is equivalent to leaving the concept unmapped.
    let mut options: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); base_concepts.len()];
    let index_b: BTreeMap<&Concept, usize> = base_concepts
        .iter()
        .enumerate()
        .map(|(i, c)| (*c, i))
        .collect();
    let index_t: BTreeMap<&Concept, usize> = target_concepts
        .iter()
        .enumerate()
        .map(|(i, c)| (*c, i))
        .collect();
    for b in &base_rels {
        for t in &target_rels {
            if b.label == t.label {
                options[index_b[&b.head]].insert(index_t[&t.head]);
                options[index_b[&b.tail]].insert(index_t[&t.tail]);
            }
        }
    }

    struct Search<'a> {
        base_rels: &'a [&'a Relation],
        target_rels: &'a [&'a Relation],
        index_b: &'a BTreeMap<&'a Concept, usize>,
        index_t: &'a BTreeMap<&'a Concept, usize>,
        options: &'a [BTreeSet<usize>],
        w: &'a ScoreWeights,
        mapping: Vec<Option<usize>>,
        used: Vec<bool>,
        best: (f64, usize),
    }

    impl Search<'_> {
        fn leaf(&mut self) {
            let mut matched: Vec<&Relation> = Vec::new();
            for b in self.base_rels {
                let (h, t) = (
                    self.mapping[self.index_b[&b.head]],
                    self.mapping[self.index_b[&b.tail]],
                );
                let hit = self.target_rels.iter().any(|r| {
                    r.label == b.label
                        && Some(self.index_t[&r.head]) == h
                        && Some(self.index_t[&r.tail]) == t
                });
                if hit {
                    matched.push(b);
                }
            }
            let mut adjacent = 0;
            for i in 0..matched.len() {
                for j in i + 1..matched.len() {
                    let (a, b) = (matched[i], matched[j]);
                    if b.involves(&a.head) || b.involves(&a.tail) {
                        adjacent += 1;
                    }
                }
            }
            let score = matched.len() as f64 * self.w.w_base + adjacent as f64 * self.w.w_conn;
            if score > self.best.0 {
                self.best = (score, matched.len());
            }
        }

        fn assign(&mut self, i: usize) {
            if i == self.mapping.len() {
                self.leaf();
                return;
            }
            self.mapping[i] = None;
            self.assign(i + 1);
            for &t in &self.options[i] {
                if !self.used[t] {
                    self.used[t] = true;
                    self.mapping[i] = Some(t);
                    self.assign(i + 1);
                    self.mapping[i] = None;
                    self.used[t] = false;
                }
            }
        }
    }

    let mut search = Search {
        base_rels: &base_rels,
        target_rels: &target_rels,
        index_b: &index_b,
        index_t: &index_t,
        options: &options,
        w,
        mapping: vec![None; base_concepts.len()],
        used: vec![false; target_concepts.len()],
        best: (0.0, 0),
    };
    search.assign(0);
    search.best
}

/// Number of weakly connected components.
pub fn component_count(net: &SemanticNetwork) -> usize {
    net.components().len()
}

/// Whether a correspondence table is one-to-one in both directions.
pub fn is_bijective(pairs: &[(Concept, Concept)]) -> bool {
    let bases: BTreeSet<&Concept> = pairs.iter().map(|p| &p.0).collect();
    let targets: BTreeSet<&Concept> = pairs.iter().map(|p| &p.1).collect();
    bases.len() == pairs.len() && targets.len() == pairs.len()
}

/// Postconditions of a subgraph exchange: each offspring holds the donor
/// root and donor subgraph, none of its own severed relations, and only KB
/// assertions. A severed triple may reappear when the donor brings it back
/// or when renaming the root onto the donor root recreates it.
pub fn check_subgraph_exchange(
    p1: &SemanticNetwork,
    p2: &SemanticNetwork,
    x: &memenet::evolution::crossover::SubgraphExchange,
    kb: &KnowledgeBase,
) -> Result<(), String> {
    let sides = [
        (p1, &x.offspring.0, &x.subgraphs.0, &x.subgraphs.1),
        (p2, &x.offspring.1, &x.subgraphs.1, &x.subgraphs.0),
    ];
    for (parent, child, own, donor) in sides {
        if !child.contains_concept(&donor.root) {
            return Err(format!("offspring lacks transplanted root {}", donor.root));
        }
        if let Some(r) = donor.relations.iter().find(|r| !child.contains_relation(r)) {
            return Err(format!("offspring lacks transplanted relation {r}"));
        }
        for r in own.severed_in(parent) {
            let renamed_root_relation = r.involves(&donor.root)
                && parent.contains_relation(&r.substitute(&donor.root, &own.root));
            if child.contains_relation(&r)
                && !donor.relations.contains(&r)
                && !renamed_root_relation
            {
                return Err(format!("severed relation {r} survived"));
            }
        }
        if let Some(r) = child.invalid_relations(kb).next() {
            return Err(format!("offspring relation {r} is not in the KB"));
        }
        check_closure(child)?;
    }
    Ok(())
}

/// Postconditions of graph merging: the offspring is the parents' union
/// plus at most one KB relation between concepts exclusive to each parent.
pub fn check_merge(
    p1: &SemanticNetwork,
    p2: &SemanticNetwork,
    child: &SemanticNetwork,
    kb: &KnowledgeBase,
) -> Result<(), String> {
    let union = p1.union(p2);
    if child.concept_set() != union.concept_set() {
        return Err("merged concepts differ from the parents' union".into());
    }
    if !union.relation_set().is_subset(child.relation_set()) {
        return Err("merged offspring lost a parent relation".into());
    }
    let extra: Vec<&Relation> = child
        .relation_set()
        .difference(union.relation_set())
        .collect();
    match extra.as_slice() {
        [] => {
            let bridgeable = p1.concepts().filter(|c| !p2.contains_concept(c)).any(|c| {
                kb.assertions_involving(c).iter().any(|r| {
                    let o = r.other(c).unwrap();
                    p2.contains_concept(o) && !p1.contains_concept(o)
                })
            });
            if bridgeable {
                return Err("a bridge existed but none was added".into());
            }
        }
        [r] => {
            if !kb.contains(r) {
                return Err(format!("bridge {r} is not in the KB"));
            }
            let crosses = |a: &Concept, b: &Concept| {
                p1.contains_concept(a)
                    && !p2.contains_concept(a)
                    && p2.contains_concept(b)
                    && !p1.contains_concept(b)
            };
            if !(crosses(&r.head, &r.tail) || crosses(&r.tail, &r.head)) {
                return Err(format!("bridge {r} does not join the parents"));
            }
        }
        more => return Err(format!("{} relations added", more.len())),
    }
    Ok(())
}

/// Postconditions of one applied mutation of the given kind.
pub fn check_mutation(
    kind: memenet::evolution::MutationKind,
    before: &SemanticNetwork,
    after: &SemanticNetwork,
    kb: &KnowledgeBase,
) -> Result<(), String> {
    use memenet::evolution::MutationKind as K;
    check_closure(after)?;
    if let Some(r) = after.invalid_relations(kb).next() {
        return Err(format!("{kind:?} produced non-KB relation {r}"));
    }
    let dc = after.concept_count() as isize - before.concept_count() as isize;
    let dr = after.size() as isize - before.size() as isize;
    let dk = component_count(after) as isize - component_count(before) as isize;
    let added: Vec<&Concept> = after
        .concept_set()
        .difference(before.concept_set())
        .collect();
    let removed: Vec<&Concept> = before
        .concept_set()
        .difference(after.concept_set())
        .collect();
    let ok = match kind {
        K::AttachConcept => dc == 1 && dr == 1 && dk == 0 && after.degree(added[0]) == 1,
        K::AddRelation => dc == 0 && dr == 1 && (dk == 0 || dk == -1),
        K::DeleteRelation => {
            dc == 0
                && dr == -1
                && (dk == 0 || dk == 1)
                && after.relation_set().is_subset(before.relation_set())
        }
        K::AddIsolatedConcept => dc == 1 && dr == 0 && dk == 1 && after.degree(added[0]) == 0,
        K::DeleteConcept => {
            dc == -1
                && dr == -(before.degree(removed[0]) as isize)
                && after.relation_set().is_subset(before.relation_set())
        }
        K::ReplaceConcept => {
            dc == 0
                && dr <= 0
                && added.len() == 1
                && removed.len() == 1
                && kb.interchangeable(
                    removed[0],
                    &before.relations_of(removed[0]),
                    added[0],
                    kb.assertions_involving(added[0]),
                )
                && after.degree(added[0]) >= 1
                && before
                    .relations()
                    .filter(|r| !r.involves(removed[0]))
                    .all(|r| after.contains_relation(r))
                && after.relations().all(|r| {
                    before.contains_relation(r)
                        || before.contains_relation(&r.substitute(added[0], removed[0]))
                })
        }
    };
    if ok {
        Ok(())
    } else {
        Err(format!(
            "{kind:?}: concepts {dc:+}, relations {dr:+}, components {dk:+}"
        ))
    }
}

/// Every relation endpoint is a declared concept.
pub fn check_closure(net: &SemanticNetwork) -> Result<(), String> {
    match net
        .relations()
        .find(|r| !net.contains_concept(&r.head) || !net.contains_concept(&r.tail))
    {
        Some(r) => Err(format!("relation {r} has an undeclared endpoint")),
        None => Ok(()),
    }
}
