//! Semantic networks: directed graphs of concepts and labeled binary
//! relations. These are the individuals of the meme pool as well as the
//! base network that analogies are drawn from.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::concept::{Concept, Position, Relation, RelationLabel};
use crate::kb::{KbError, KnowledgeBase};

#[derive(Debug, thiserror::Error)]
pub enum NetworkError {
    #[error("self-loop rejected: {0}")]
    SelfLoop(Relation),
    #[error("concept {0} is not in the network")]
    MissingConcept(Concept),
    #[error("seed concept {0} does not occur in the knowledge base")]
    UnknownSeed(Concept),
    #[error("relation {0} refers to an undeclared concept")]
    UndeclaredConcept(Relation),
    #[error("duplicate relation {0}")]
    DuplicateRelation(Relation),
    #[error("{0} must be at least 1")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error("network json: {0}")]
    Json(#[from] serde_json::Error),
}

/// A directed labeled graph. Both concepts and relations are sets kept in
/// canonical order; isolated concepts are allowed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SemanticNetwork {
    concepts: BTreeSet<Concept>,
    relations: BTreeSet<Relation>,
}

impl SemanticNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_relations(
        relations: impl IntoIterator<Item = Relation>,
    ) -> Result<Self, NetworkError> {
        let mut net = Self::new();
        for r in relations {
            net.add_relation_triple(r)?;
        }
        Ok(net)
    }

    pub fn concepts(&self) -> impl ExactSizeIterator<Item = &Concept> + Clone {
        self.concepts.iter()
    }

    pub fn relations(&self) -> impl ExactSizeIterator<Item = &Relation> + Clone {
        self.relations.iter()
    }

    pub fn concept_set(&self) -> &BTreeSet<Concept> {
        &self.concepts
    }

    pub fn relation_set(&self) -> &BTreeSet<Relation> {
        &self.relations
    }

    pub fn contains_concept(&self, c: &Concept) -> bool {
        self.concepts.contains(c)
    }

    pub fn contains_relation(&self, r: &Relation) -> bool {
        self.relations.contains(r)
    }

    pub fn concept_count(&self) -> usize {
        self.concepts.len()
    }

    /// Network size is the number of relations.
    pub fn size(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    /// Returns false if the concept was already present.
    pub fn add_concept(&mut self, c: Concept) -> bool {
        self.concepts.insert(c)
    }

    /// Insert `label(head, tail)`, adding missing endpoints. Returns false
    /// when the triple was already present (no-op).
    pub fn add_relation(
        &mut self,
        label: RelationLabel,
        head: Concept,
        tail: Concept,
    ) -> Result<bool, NetworkError> {
        self.add_relation_triple(Relation::new(label, head, tail))
    }

    pub fn add_relation_triple(&mut self, r: Relation) -> Result<bool, NetworkError> {
        if r.is_self_loop() {
            return Err(NetworkError::SelfLoop(r));
        }
        self.concepts.insert(r.head.clone());
        self.concepts.insert(r.tail.clone());
        Ok(self.relations.insert(r))
    }

    /// Remove a relation, keeping its endpoints.
    pub fn remove_relation(&mut self, r: &Relation) -> bool {
        self.relations.remove(r)
    }

    /// Remove `c` together with every relation it takes part in. Returns the
    /// removed relations.
    pub fn remove_concept(&mut self, c: &Concept) -> Result<Vec<Relation>, NetworkError> {
        if !self.concepts.remove(c) {
            return Err(NetworkError::MissingConcept(c.clone()));
        }
        let removed: Vec<Relation> = self
            .relations
            .iter()
            .filter(|r| r.involves(c))
            .cloned()
            .collect();
        for r in &removed {
            self.relations.remove(r);
        }
        Ok(removed)
    }

    /// Relations incident to `c`, in canonical order.
    pub fn relations_of(&self, c: &Concept) -> Vec<Relation> {
        self.relations
            .iter()
            .filter(|r| r.involves(c))
            .cloned()
            .collect()
    }

    pub fn degree(&self, c: &Concept) -> usize {
        self.relations.iter().filter(|r| r.involves(c)).count()
    }

    /// Weakly connected components, ordered by their smallest concept.
    pub fn components(&self) -> Vec<BTreeSet<Concept>> {
        let index: BTreeMap<&Concept, usize> = self
            .concepts
            .iter()
            .enumerate()
            .map(|(i, c)| (c, i))
            .collect();
        let mut parent: Vec<usize> = (0..index.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for r in &self.relations {
            let (a, b) = (index[&r.head], index[&r.tail]);
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut groups: BTreeMap<usize, BTreeSet<Concept>> = BTreeMap::new();
        for (c, &i) in &index {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().insert((*c).clone());
        }
        let mut out: Vec<BTreeSet<Concept>> = groups.into_values().collect();
        out.sort_by(|a, b| a.first().cmp(&b.first()));
        out
    }

    /// Set union of two networks.
    pub fn union(&self, other: &SemanticNetwork) -> SemanticNetwork {
        SemanticNetwork {
            concepts: self.concepts.union(&other.concepts).cloned().collect(),
            relations: self.relations.union(&other.relations).cloned().collect(),
        }
    }

    /// Relations of this network that are not assertions of `kb`.
    pub fn invalid_relations<'a>(
        &'a self,
        kb: &'a KnowledgeBase,
    ) -> impl Iterator<Item = &'a Relation> + 'a {
        self.relations.iter().filter(move |r| !kb.contains(r))
    }

    pub fn is_kb_valid(&self, kb: &KnowledgeBase) -> bool {
        self.invalid_relations(kb).next().is_none()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        let doc: NetworkDoc = serde_json::from_str(text)?;
        doc.try_into()
    }

    /// Graphviz DOT: one node per concept, one labeled edge per relation.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph {} {{", dot_quote(name));
        for c in &self.concepts {
            let _ = writeln!(out, "  {};", dot_quote(c.as_str()));
        }
        for r in &self.relations {
            let _ = writeln!(
                out,
                "  {} -> {} [label={}];",
                dot_quote(r.head.as_str()),
                dot_quote(r.tail.as_str()),
                dot_quote(r.label.as_str())
            );
        }
        out.push_str("}\n");
        out
    }
}

fn dot_quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for ch in s.chars() {
        if ch == '"' || ch == '\\' {
            q.push('\\');
        }
        q.push(ch);
    }
    q.push('"');
    q
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    concepts: Vec<Concept>,
    relations: Vec<Relation>,
}

impl Serialize for SemanticNetwork {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        NetworkDoc {
            concepts: self.concepts.iter().cloned().collect(),
            relations: self.relations.iter().cloned().collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SemanticNetwork {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = NetworkDoc::deserialize(deserializer)?;
        doc.try_into().map_err(serde::de::Error::custom)
    }
}

impl TryFrom<NetworkDoc> for SemanticNetwork {
    type Error = NetworkError;

    fn try_from(doc: NetworkDoc) -> Result<Self, NetworkError> {
        let mut net = SemanticNetwork::new();
        for c in doc.concepts {
            net.add_concept(c);
        }
        for r in doc.relations {
            if !net.contains_concept(&r.head) || !net.contains_concept(&r.tail) {
                return Err(NetworkError::UndeclaredConcept(r));
            }
            if !net.add_relation_triple(r.clone())? {
                return Err(NetworkError::DuplicateRelation(r));
            }
        }
        Ok(net)
    }
}

/// Grow a network by random KB expansion.
///
/// Starts from `seeds` (or one random KB concept when empty), then
/// repeatedly picks a network concept, lists its KB assertions not yet in
/// the network and appends one at random together with its other concept.
/// Stops once `c_max` concepts are present or after `timeout` consecutive
/// picks that had nothing left to add.
pub fn grow_random<R: Rng + ?Sized>(
    kb: &KnowledgeBase,
    seeds: &[Concept],
    c_max: usize,
    timeout: usize,
    rng: &mut R,
) -> Result<SemanticNetwork, NetworkError> {
    if c_max == 0 {
        return Err(NetworkError::InvalidParameter("c_max"));
    }
    if timeout == 0 {
        return Err(NetworkError::InvalidParameter("timeout"));
    }
    let mut net = SemanticNetwork::new();
    if seeds.is_empty() {
        net.add_concept(kb.random_concept(rng)?);
    } else {
        for s in seeds {
            if !kb.has_concept(s) {
                return Err(NetworkError::UnknownSeed(s.clone()));
            }
            net.add_concept(s.clone());
        }
    }

    let mut failures = 0;
    while net.concept_count() < c_max && failures < timeout {
        let picked = net
            .concepts()
            .nth(rng.gen_range(0..net.concept_count()))
            .expect("index in range")
            .clone();
        let fresh: Vec<&Relation> = kb
            .assertions_involving(&picked)
            .iter()
            .filter(|r| !net.contains_relation(r))
            .collect();
        if fresh.is_empty() {
            failures += 1;
            continue;
        }
        failures = 0;
        let r = fresh[rng.gen_range(0..fresh.len())].clone();
        net.add_relation_triple(r)?;
    }
    Ok(net)
}

/// A relation seen from one of its endpoints, with that endpoint abstracted
/// away: `CapableOf(·, fly)` is `{label: CapableOf, other: fly, root: Head}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelationPattern {
    pub label: RelationLabel,
    pub other: Concept,
    pub root: Position,
}

impl RelationPattern {
    pub fn of(r: &Relation, root: &Concept) -> Option<Self> {
        let pos = r.position_of(root)?;
        Some(RelationPattern {
            label: r.label.clone(),
            other: r.other(root)?.clone(),
            root: pos,
        })
    }
}

/// The part of a network specific to a crossover concept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgraph {
    pub root: Concept,
    pub concepts: BTreeSet<Concept>,
    pub relations: BTreeSet<Relation>,
}

impl Subgraph {
    /// Relations of `net` that touch a non-root subgraph concept but were
    /// left out of the subgraph.
    pub fn severed_in(&self, net: &SemanticNetwork) -> BTreeSet<Relation> {
        net.relations()
            .filter(|r| !self.relations.contains(r))
            .filter(|r| {
                [&r.head, &r.tail]
                    .iter()
                    .any(|c| **c != self.root && self.concepts.contains(*c))
            })
            .cloned()
            .collect()
    }
}

/// Cut out the subgraph specific to `root`.
///
/// Contains `root`, its relations whose pattern is not in `common` with
/// their other concepts, and every relation incident to those concepts
/// along with its far end. Concepts reached only through a common relation
/// of `root` are excluded, so relations leading to them are severed.
pub fn extract_crossover_subgraph(
    net: &SemanticNetwork,
    root: &Concept,
    common: &BTreeSet<RelationPattern>,
) -> Subgraph {
    let mut relations = BTreeSet::new();
    let mut first_ring = BTreeSet::new();
    let mut common_concepts = BTreeSet::new();
    for r in net.relations().filter(|r| r.involves(root)) {
        let pattern = RelationPattern::of(r, root).expect("incident relation");
        if common.contains(&pattern) {
            common_concepts.insert(pattern.other);
        } else {
            first_ring.insert(pattern.other);
            relations.insert(r.clone());
        }
    }
    let blocked: BTreeSet<&Concept> = common_concepts.difference(&first_ring).collect();

    let mut concepts: BTreeSet<Concept> = first_ring.clone();
    concepts.insert(root.clone());
    for c in &first_ring {
        for r in net.relations().filter(|r| r.involves(c)) {
            let other = r.other(c).expect("incident relation");
            if other == root || blocked.contains(other) {
                continue;
            }
            concepts.insert(other.clone());
            relations.insert(r.clone());
        }
    }
    Subgraph {
        root: root.clone(),
        concepts,
        relations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(s: &str) -> Concept {
        Concept::new(s).unwrap()
    }

    fn rel(l: &str, h: &str, t: &str) -> Relation {
        Relation::parse(l, h, t)
    }

    fn net(rels: &[(&str, &str, &str)]) -> SemanticNetwork {
        SemanticNetwork::from_relations(rels.iter().map(|(l, h, t)| rel(l, h, t))).unwrap()
    }

    pub(crate) fn bird_network() -> SemanticNetwork {
        net(&[
            ("CapableOf", "bird", "fly"),
            ("AtLocation", "bird", "air"),
            ("HasA", "bird", "feather"),
            ("AtLocation", "bird", "forest"),
            ("PartOf", "feather", "wing"),
            ("PartOf", "tree", "forest"),
            ("UsedFor", "wing", "fly"),
        ])
    }

    fn common(root: &str, pats: &[(&str, &str)]) -> BTreeSet<RelationPattern> {
        let root = c(root);
        pats.iter()
            .map(|(l, o)| RelationPattern::of(&rel(l, root.as_str(), o), &root).unwrap())
            .collect()
    }

    #[test]
    fn add_relation_inserts_endpoints_and_flags_duplicates() {
        let mut n = SemanticNetwork::new();
        assert!(n.add_relation_triple(rel("IsA", "bird", "animal")).unwrap());
        assert_eq!((n.concept_count(), n.size()), (2, 1));
        assert!(!n.add_relation_triple(rel("IsA", "bird", "animal")).unwrap());
        assert_eq!(n.size(), 1);
        let err = n
            .add_relation_triple(rel("IsA", "bird", "Bird"))
            .unwrap_err();
        assert!(matches!(err, NetworkError::SelfLoop(_)));
    }

    #[test]
    fn add_relation_to_existing_concept() {
        let mut n = SemanticNetwork::new();
        n.add_concept(c("human"));
        n.add_relation_triple(rel("AtLocation", "human", "city"))
            .unwrap();
        assert_eq!(n.concept_count(), 2);
        assert_eq!(n.size(), 1);
    }

    #[test]
    fn remove_concept_drops_incident_relations() {
        let mut n = net(&[("IsA", "bird", "animal")]);
        n.remove_concept(&c("bird")).unwrap();
        assert_eq!(n.concepts().cloned().collect::<Vec<_>>(), vec![c("animal")]);
        assert_eq!(n.size(), 0);
        n.remove_concept(&c("animal")).unwrap();
        assert!(n.is_empty());
        assert!(matches!(
            n.remove_concept(&c("animal")),
            Err(NetworkError::MissingConcept(_))
        ));
    }

    #[test]
    fn remove_hub_drops_exactly_its_degree() {
        let mut n = bird_network();
        let scan = n.relations().filter(|r| r.involves(&c("bird"))).count();
        let before = n.size();
        let removed = n.remove_concept(&c("bird")).unwrap();
        assert_eq!(removed.len(), scan);
        assert_eq!(n.size(), before - scan);
    }

    #[test]
    fn components_examples() {
        assert!(SemanticNetwork::new().components().is_empty());
        let n = net(&[("IsA", "a", "b"), ("IsA", "c", "d")]);
        let comps = n.components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].first(), Some(&c("a")));
        // Two parents bridged by CreatedBy(art, human).
        let merged = net(&[
            ("Desires", "human", "eat"),
            ("CapableOf", "human", "think"),
            ("IsA", "art", "creation"),
            ("CreatedBy", "art", "human"),
        ]);
        assert_eq!(merged.components().len(), 1);
    }

    #[test]
    fn size_counts_relations() {
        let mut n = bird_network();
        assert_eq!(n.size(), 7);
        n.remove_relation(&rel("UsedFor", "wing", "fly"));
        assert_eq!(n.size(), 6);
    }

    #[test]
    fn bird_subgraph() {
        let n = bird_network();
        let sub = extract_crossover_subgraph(
            &n,
            &c("bird"),
            &common("bird", &[("CapableOf", "fly"), ("AtLocation", "air")]),
        );
        let expected: BTreeSet<Relation> = [
            rel("HasA", "bird", "feather"),
            rel("AtLocation", "bird", "forest"),
            rel("PartOf", "feather", "wing"),
            rel("PartOf", "tree", "forest"),
        ]
        .into_iter()
        .collect();
        assert_eq!(sub.relations, expected);
        assert!(!sub.concepts.contains(&c("fly")));
        assert!(sub.concepts.contains(&c("bird")));
        let severed = sub.severed_in(&n);
        assert!(severed.contains(&rel("UsedFor", "wing", "fly")));
    }

    #[test]
    fn airplane_subgraph() {
        let n = net(&[
            ("CapableOf", "airplane", "fly"),
            ("AtLocation", "airplane", "air"),
            ("HasA", "airplane", "propeller"),
            ("MadeOf", "airplane", "metal"),
            ("UsedFor", "airplane", "travel"),
            ("MadeOf", "propeller", "metal"),
        ]);
        let sub = extract_crossover_subgraph(
            &n,
            &c("airplane"),
            &common("airplane", &[("CapableOf", "fly"), ("AtLocation", "air")]),
        );
        let expected: BTreeSet<Relation> = [
            rel("HasA", "airplane", "propeller"),
            rel("MadeOf", "airplane", "metal"),
            rel("UsedFor", "airplane", "travel"),
            rel("MadeOf", "propeller", "metal"),
        ]
        .into_iter()
        .collect();
        assert_eq!(sub.relations, expected);
    }

    #[test]
    fn all_common_leaves_root_alone() {
        let n = net(&[("CapableOf", "bird", "fly")]);
        let sub =
            extract_crossover_subgraph(&n, &c("bird"), &common("bird", &[("CapableOf", "fly")]));
        assert!(sub.relations.is_empty());
        assert_eq!(sub.concepts, [c("bird")].into_iter().collect());
    }

    #[test]
    fn dot_has_one_edge_per_relation() {
        let dot = bird_network().to_dot("parent");
        assert_eq!(dot.matches(" -> ").count(), 7);
        assert!(dot.contains("\"bird\" -> \"feather\" [label=\"HasA\"];"));
    }

    #[test]
    fn json_is_canonical_and_strict() {
        let n = net(&[("IsA", "bird", "animal"), ("CapableOf", "bird", "fly")]);
        let json = n.to_json();
        let first_cap = json.find("CapableOf").unwrap();
        let first_isa = json.find("IsA").unwrap();
        assert!(first_cap < first_isa);
        assert_eq!(SemanticNetwork::from_json(&json).unwrap(), n);

        let bad =
            r#"{"concepts":["bird"],"relations":[{"label":"IsA","head":"bird","tail":"animal"}]}"#;
        assert!(matches!(
            SemanticNetwork::from_json(bad),
            Err(NetworkError::UndeclaredConcept(_))
        ));
    }

    fn toy_kb() -> KnowledgeBase {
        let text = "CapableOf\thuman\tthink\t3\nDesires\thuman\teat\t3\n\
                    IsA\tbird\tanimal\t3\nIsA\tcat\tanimal\t3\nHasA\tcat\tfur\t3\n";
        KnowledgeBase::from_reader(text.as_bytes(), 2.0).unwrap()
    }

    #[test]
    fn grow_single_concept() {
        let kb = toy_kb();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = grow_random(&kb, &[c("human")], 1, 10, &mut rng).unwrap();
        assert_eq!(n.concepts().cloned().collect::<Vec<_>>(), vec![c("human")]);
        assert_eq!(n.size(), 0);
    }

    #[test]
    fn grow_unknown_seed_is_named() {
        let kb = toy_kb();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let err = grow_random(&kb, &[c("unicorn")], 3, 10, &mut rng).unwrap_err();
        assert!(err.to_string().contains("unicorn"));
    }

    #[test]
    fn grow_stalls_at_reachable_closure() {
        let kb = toy_kb();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = grow_random(&kb, &[c("human")], 10, 10, &mut rng).unwrap();
        // Closure of human over the KB graph: {human, think, eat}.
        let closure: BTreeSet<Concept> = [c("human"), c("think"), c("eat")].into_iter().collect();
        assert!(n.concept_set().is_subset(&closure));
        assert_eq!(n.concept_set(), &closure);
        assert!(n.is_kb_valid(&kb));
    }

    fn arb_net() -> impl Strategy<Value = SemanticNetwork> {
        let labels = prop::sample::select(vec!["IsA", "HasA", "PartOf", "Orbits"]);
        let concept = prop::sample::select(vec!["sun", "planet", "moon", "star", "space", "gas"]);
        prop::collection::vec((labels, concept.clone(), concept.clone()), 0..12).prop_map(|v| {
            let mut n = SemanticNetwork::new();
            for (l, h, t) in v {
                if h != t {
                    n.add_relation_triple(rel(l, h, t)).unwrap();
                } else {
                    n.add_concept(c(h));
                }
            }
            n
        })
    }

    proptest! {
        #[test]
        fn json_round_trip(n in arb_net()) {
            prop_assert_eq!(SemanticNetwork::from_json(&n.to_json()).unwrap(), n);
        }

        #[test]
        fn components_partition_without_cross_edges(n in arb_net()) {
            let comps = n.components();
            let mut seen = BTreeSet::new();
            for comp in &comps {
                for x in comp {
                    prop_assert!(seen.insert(x.clone()));
                }
            }
            prop_assert_eq!(&seen, n.concept_set());
            for r in n.relations() {
                let owner = comps.iter().position(|k| k.contains(&r.head));
                prop_assert_eq!(owner, comps.iter().position(|k| k.contains(&r.tail)));
            }
        }

        #[test]
        fn closure_after_edits(n in arb_net(), drop in prop::collection::vec(any::<prop::sample::Index>(), 0..4)) {
            let mut n = n;
            for d in drop {
                if n.is_empty() { break; }
                let victim = n.concepts().nth(d.index(n.concept_count())).unwrap().clone();
                n.remove_concept(&victim).unwrap();
            }
            for r in n.relations() {
                prop_assert!(n.contains_concept(&r.head) && n.contains_concept(&r.tail));
            }
        }

        #[test]
        fn grown_networks_are_kb_backed(seed in any::<u64>(), c_max in 1usize..8) {
            let kb = toy_kb();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = grow_random(&kb, &[], c_max, 10, &mut rng).unwrap();
            prop_assert!(n.is_kb_valid(&kb));
            prop_assert!(n.concept_count() <= c_max.max(1));
        }
    }
}
