//! Structure mapping between two semantic networks.
//!
//! Concepts are entities, relations map only onto identically labeled
//! relations with aligned argument positions, and attributes are expressed
//! as ordinary `IsA` relations. A global mapping (gmap) is a set of relation
//! matches whose induced concept correspondences are one-to-one. Its score
//! rewards every matched relation and, on top of that, every pair of
//! matched relations that share a concept, so connected structure beats
//! the same number of isolated facts.
//!
//! The best gmap is found exactly by branch and bound while the number of
//! match hypotheses is small, and by beam search otherwise.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::concept::{Concept, Relation};
use crate::semnet::SemanticNetwork;

/// Scores closer than this are treated as equal when ranking gmaps.
pub const SCORE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SmeError {
    #[error("inconsistent gmap: {0}")]
    Inconsistent(String),
    #[error("invalid score weights: {0}")]
    InvalidWeights(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreWeights {
    /// Credit per matched relation.
    pub w_base: f64,
    /// Credit per pair of matched relations sharing a mapped concept.
    pub w_conn: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            w_base: 0.2,
            w_conn: 0.05,
        }
    }
}

impl ScoreWeights {
    pub fn new(w_base: f64, w_conn: f64) -> Result<Self, SmeError> {
        let w = ScoreWeights { w_base, w_conn };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), SmeError> {
        if !(self.w_base > 0.0 && self.w_base.is_finite()) {
            return Err(SmeError::InvalidWeights(format!(
                "w_base = {} must be > 0",
                self.w_base
            )));
        }
        if !(self.w_conn >= 0.0 && self.w_conn.is_finite()) {
            return Err(SmeError::InvalidWeights(format!(
                "w_conn = {} must be >= 0",
                self.w_conn
            )));
        }
        Ok(())
    }

    fn combine(&self, matched: usize, adjacent: usize) -> f64 {
        matched as f64 * self.w_base + adjacent as f64 * self.w_conn
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLimits {
    /// Largest hypothesis count solved exactly.
    pub exact_limit: usize,
    pub beam_width: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            exact_limit: 24,
            beam_width: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MatchHypothesis {
    pub base: Relation,
    pub target: Relation,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConceptCorrespondence {
    pub base: Concept,
    pub target: Concept,
}

/// A structurally consistent set of relation matches.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GMap {
    pub hypotheses: Vec<MatchHypothesis>,
    pub correspondences: Vec<ConceptCorrespondence>,
    pub adjacent_pairs: usize,
    pub score: f64,
}

impl GMap {
    pub fn empty() -> Self {
        GMap {
            hypotheses: Vec::new(),
            correspondences: Vec::new(),
            adjacent_pairs: 0,
            score: 0.0,
        }
    }

    /// Build and score a gmap, rejecting inconsistent hypothesis sets.
    pub fn new(mut hypotheses: Vec<MatchHypothesis>, w: &ScoreWeights) -> Result<Self, SmeError> {
        hypotheses.sort();
        hypotheses.dedup();
        let correspondences = correspondences(&hypotheses)?;
        let adjacent_pairs = adjacency_count(&hypotheses, &correspondences);
        Ok(GMap {
            score: w.combine(hypotheses.len(), adjacent_pairs),
            hypotheses,
            correspondences,
            adjacent_pairs,
        })
    }
}

/// Every pair of base and target relations with the same label.
pub fn enumerate_hypotheses(
    base: &SemanticNetwork,
    target: &SemanticNetwork,
) -> Vec<MatchHypothesis> {
    let mut by_label: BTreeMap<_, Vec<&Relation>> = BTreeMap::new();
    for t in target.relations() {
        by_label.entry(&t.label).or_default().push(t);
    }
    let mut out = Vec::new();
    for b in base.relations() {
        if let Some(ts) = by_label.get(&b.label) {
            for t in ts {
                out.push(MatchHypothesis {
                    base: b.clone(),
                    target: (*t).clone(),
                });
            }
        }
    }
    out
}

/// Induced concept correspondences, or an error if they are not one-to-one
/// or a relation is matched twice.
pub fn correspondences(hyps: &[MatchHypothesis]) -> Result<Vec<ConceptCorrespondence>, SmeError> {
    let mut forward: BTreeMap<&Concept, &Concept> = BTreeMap::new();
    let mut backward: HashMap<&Concept, &Concept> = HashMap::new();
    let mut base_used = HashSet::new();
    let mut target_used = HashSet::new();
    for h in hyps {
        if h.base.label != h.target.label {
            return Err(SmeError::Inconsistent(format!(
                "label mismatch in {} / {}",
                h.base, h.target
            )));
        }
        if !base_used.insert(&h.base) {
            return Err(SmeError::Inconsistent(format!(
                "base relation {} matched twice",
                h.base
            )));
        }
        if !target_used.insert(&h.target) {
            return Err(SmeError::Inconsistent(format!(
                "target relation {} matched twice",
                h.target
            )));
        }
        for (b, t) in [
            (&h.base.head, &h.target.head),
            (&h.base.tail, &h.target.tail),
        ] {
            if let Some(prev) = forward.insert(b, t) {
                if prev != t {
                    return Err(SmeError::Inconsistent(format!(
                        "{b} maps to both {prev} and {t}"
                    )));
                }
            }
            if let Some(prev) = backward.insert(t, b) {
                if prev != b {
                    return Err(SmeError::Inconsistent(format!(
                        "{t} is the image of both {prev} and {b}"
                    )));
                }
            }
        }
    }
    Ok(forward
        .into_iter()
        .map(|(b, t)| ConceptCorrespondence {
            base: b.clone(),
            target: t.clone(),
        })
        .collect())
}

pub fn consistent(hyps: &[MatchHypothesis]) -> bool {
    correspondences(hyps).is_ok()
}

/// Unordered pairs of hypotheses whose base relations share a concept that
/// is also shared, under the mapping, by their target relations.
fn adjacency_count(hyps: &[MatchHypothesis], table: &[ConceptCorrespondence]) -> usize {
    let map: HashMap<&Concept, &Concept> = table.iter().map(|c| (&c.base, &c.target)).collect();
    let mut count = 0;
    for (i, a) in hyps.iter().enumerate() {
        for b in &hyps[i + 1..] {
            let linked = [&a.base.head, &a.base.tail].into_iter().any(|c| {
                b.base.involves(c)
                    && map
                        .get(c)
                        .is_some_and(|m| a.target.involves(m) && b.target.involves(m))
            });
            if linked {
                count += 1;
            }
        }
    }
    count
}

/// Systematicity score of a consistent hypothesis set.
pub fn score(hyps: &[MatchHypothesis], w: &ScoreWeights) -> Result<f64, SmeError> {
    Ok(GMap::new(hyps.to_vec(), w)?.score)
}

/// Best gmap for a base/target pair, plus how it was found.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingResult {
    pub best: GMap,
    pub fitness: f64,
    pub exact: bool,
    pub weights: ScoreWeights,
}

impl MappingResult {
    pub fn correspondence_table(&self) -> &[ConceptCorrespondence] {
        &self.best.correspondences
    }

    pub fn matched_relations(&self) -> usize {
        self.best.hypotheses.len()
    }

    pub fn report(&self) -> MappingReport {
        MappingReport {
            exact: self.exact,
            score: self.fitness,
            base_term: self.best.hypotheses.len() as f64 * self.weights.w_base,
            connectivity_term: self.best.adjacent_pairs as f64 * self.weights.w_conn,
            matched_relations: self.best.hypotheses.len(),
            adjacent_pairs: self.best.adjacent_pairs,
            weights: self.weights,
            correspondences: self.best.correspondences.clone(),
            matches: self.best.hypotheses.clone(),
        }
    }
}

/// Serialized form of a mapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingReport {
    pub exact: bool,
    pub score: f64,
    pub base_term: f64,
    pub connectivity_term: f64,
    pub matched_relations: usize,
    pub adjacent_pairs: usize,
    pub weights: ScoreWeights,
    pub correspondences: Vec<ConceptCorrespondence>,
    pub matches: Vec<MatchHypothesis>,
}

impl MappingReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Highest scoring consistent gmap. Ties prefer more matched relations, then
/// the lexicographically smallest correspondence table.
pub fn best_gmap(
    base: &SemanticNetwork,
    target: &SemanticNetwork,
    w: &ScoreWeights,
    limits: &SearchLimits,
) -> MappingResult {
    let problem = Problem::new(base, target, *w);
    let exact = problem.hypothesis_count <= limits.exact_limit;
    let found = if problem.hypothesis_count == 0 {
        Candidate::default()
    } else if exact {
        problem.solve_exact()
    } else {
        problem.solve_beam(limits.beam_width.max(1))
    };
    let hyps = found
        .pairs
        .iter()
        .map(|&(bi, ti)| MatchHypothesis {
            base: problem.base_rels[bi].clone(),
            target: problem.target_rels[ti as usize].clone(),
        })
        .collect();
    let best = GMap::new(hyps, w).expect("search only yields consistent gmaps");
    debug_assert_eq!(best.adjacent_pairs, found.adjacent);
    MappingResult {
        fitness: best.score,
        best,
        exact,
        weights: *w,
    }
}

/// Analogical similarity of `individual` to `base`.
pub fn fitness(
    base: &SemanticNetwork,
    individual: &SemanticNetwork,
    w: &ScoreWeights,
    limits: &SearchLimits,
) -> f64 {
    best_gmap(base, individual, w, limits).fitness
}

const UNMAPPED: u32 = u32::MAX;

#[derive(Debug, Clone, Default)]
struct Candidate {
    /// (base relation index, target relation index), sorted by base index.
    pairs: Vec<(usize, u32)>,
    adjacent: usize,
    score: f64,
    /// (base concept, target concept) indices sorted by base; indices follow
    /// the lexicographic order of the concept labels.
    table: Vec<(u32, u32)>,
}

impl Candidate {
    /// Strict preference in the tie-breaking order.
    fn beats(&self, other: &Candidate) -> bool {
        rank(
            self.score,
            self.pairs.len(),
            &self.table,
            other.score,
            other.pairs.len(),
            &other.table,
        ) == Ordering::Less
    }
}

/// `Less` means the first argument ranks ahead.
fn rank(s1: f64, n1: usize, t1: &[(u32, u32)], s2: f64, n2: usize, t2: &[(u32, u32)]) -> Ordering {
    if s1 > s2 + SCORE_EPS {
        return Ordering::Less;
    }
    if s2 > s1 + SCORE_EPS {
        return Ordering::Greater;
    }
    n2.cmp(&n1).then_with(|| t1.cmp(t2))
}

struct Problem {
    w: ScoreWeights,
    base_rels: Vec<Relation>,
    target_rels: Vec<Relation>,
    base_ends: Vec<(u32, u32)>,
    target_ends: Vec<(u32, u32)>,
    candidates: Vec<Vec<u32>>,
    /// Base relations sharing a concept with each base relation.
    adjacent: Vec<Vec<usize>>,
    /// Base relations that have at least one candidate, in search order.
    order: Vec<usize>,
    base_concepts: usize,
    target_concepts: usize,
    hypothesis_count: usize,
}

impl Problem {
    fn new(base: &SemanticNetwork, target: &SemanticNetwork, w: ScoreWeights) -> Self {
        let index = |net: &SemanticNetwork| -> HashMap<Concept, u32> {
            net.concepts()
                .enumerate()
                .map(|(i, c)| (c.clone(), i as u32))
                .collect()
        };
        let (bidx, tidx) = (index(base), index(target));
        let base_rels: Vec<Relation> = base.relations().cloned().collect();
        let target_rels: Vec<Relation> = target.relations().cloned().collect();
        let base_ends = base_rels
            .iter()
            .map(|r| (bidx[&r.head], bidx[&r.tail]))
            .collect();
        let target_ends = target_rels
            .iter()
            .map(|r| (tidx[&r.head], tidx[&r.tail]))
            .collect();

        let mut by_label: HashMap<_, Vec<u32>> = HashMap::new();
        for (i, t) in target_rels.iter().enumerate() {
            by_label.entry(t.label.clone()).or_default().push(i as u32);
        }
        let candidates: Vec<Vec<u32>> = base_rels
            .iter()
            .map(|b| by_label.get(&b.label).cloned().unwrap_or_default())
            .collect();
        let hypothesis_count = candidates.iter().map(Vec::len).sum();

        let adjacent: Vec<Vec<usize>> = (0..base_rels.len())
            .map(|i| {
                (0..base_rels.len())
                    .filter(|&j| {
                        j != i
                            && (base_rels[j].involves(&base_rels[i].head)
                                || base_rels[j].involves(&base_rels[i].tail))
                    })
                    .collect()
            })
            .collect();

        // Most constrained first, then keep neighbours of already ordered
        // relations close so adjacency credit shows up early.
        let mut pending: BTreeSet<usize> = (0..base_rels.len())
            .filter(|&i| !candidates[i].is_empty())
            .collect();
        let mut order = Vec::with_capacity(pending.len());
        let mut placed = vec![false; base_rels.len()];
        while !pending.is_empty() {
            let next = *pending
                .iter()
                .min_by_key(|&&i| {
                    let linked = adjacent[i].iter().filter(|&&j| placed[j]).count();
                    (usize::MAX - linked, candidates[i].len(), i)
                })
                .expect("non-empty");
            pending.remove(&next);
            placed[next] = true;
            order.push(next);
        }

        Problem {
            w,
            base_rels,
            target_rels,
            base_ends,
            target_ends,
            candidates,
            adjacent,
            order,
            base_concepts: bidx.len(),
            target_concepts: tidx.len(),
            hypothesis_count,
        }
    }

    fn solve_exact(&self) -> Candidate {
        let mut state = State::new(self);
        let mut best = Candidate::default();
        self.branch(0, &mut state, &mut best);
        best
    }

    fn branch(&self, depth: usize, state: &mut State, best: &mut Candidate) {
        if depth == self.order.len() {
            let cand = state.candidate(self);
            if cand.beats(best) {
                *best = cand;
            }
            return;
        }
        if !self.may_improve(depth, state, best) {
            return;
        }
        let bi = self.order[depth];
        for &ti in &self.candidates[bi] {
            if state.can_add(self, bi, ti) {
                state.add(self, bi, ti);
                self.branch(depth + 1, state, best);
                state.remove(self, bi, ti);
            }
        }
        self.branch(depth + 1, state, best);
    }

    /// Optimistic completion of the current partial assignment.
    fn may_improve(&self, depth: usize, state: &State, best: &Candidate) -> bool {
        let mut open = vec![false; self.base_rels.len()];
        let mut open_count = 0;
        for &bi in &self.order[depth..] {
            if self.candidates[bi]
                .iter()
                .any(|&ti| state.can_add(self, bi, ti))
            {
                open[bi] = true;
                open_count += 1;
            }
        }
        let mut extra_adjacent = 0;
        for &bi in &self.order[depth..] {
            if !open[bi] {
                continue;
            }
            for &bj in &self.adjacent[bi] {
                // Count open-open pairs once, open-chosen pairs always.
                if state.chosen[bj].is_some() || (open[bj] && bj > bi) {
                    extra_adjacent += 1;
                }
            }
        }
        let max_n = state.count + open_count;
        let bound = self.w.combine(max_n, state.adjacent + extra_adjacent);
        if bound < best.score - SCORE_EPS {
            return false;
        }
        if bound <= best.score + SCORE_EPS && max_n < best.pairs.len() {
            return false;
        }
        true
    }

    fn solve_beam(&self, width: usize) -> Candidate {
        let mut best = Candidate::default();
        let mut beam: Vec<Vec<(usize, u32)>> = vec![Vec::new()];
        let mut seen: HashSet<Vec<(usize, u32)>> = HashSet::new();
        while !beam.is_empty() {
            let mut next: Vec<Candidate> = Vec::new();
            for pairs in &beam {
                let mut state = State::new(self);
                for &(bi, ti) in pairs {
                    state.add(self, bi, ti);
                }
                for &bi in &self.order {
                    if state.chosen[bi].is_some() {
                        continue;
                    }
                    for &ti in &self.candidates[bi] {
                        if !state.can_add(self, bi, ti) {
                            continue;
                        }
                        state.add(self, bi, ti);
                        let cand = state.candidate(self);
                        state.remove(self, bi, ti);
                        if seen.insert(cand.pairs.clone()) {
                            next.push(cand);
                        }
                    }
                }
            }
            next.sort_by(|a, b| {
                rank(
                    a.score,
                    a.pairs.len(),
                    &a.table,
                    b.score,
                    b.pairs.len(),
                    &b.table,
                )
            });
            next.truncate(width);
            if let Some(top) = next.first() {
                if top.beats(&best) {
                    best = top.clone();
                }
            }
            beam = next.into_iter().map(|c| c.pairs).collect();
        }
        best
    }
}

struct State {
    map_bt: Vec<u32>,
    map_tb: Vec<u32>,
    uses: Vec<u32>,
    target_used: Vec<bool>,
    chosen: Vec<Option<u32>>,
    count: usize,
    adjacent: usize,
}

impl State {
    fn new(p: &Problem) -> Self {
        State {
            map_bt: vec![UNMAPPED; p.base_concepts],
            map_tb: vec![UNMAPPED; p.target_concepts],
            uses: vec![0; p.base_concepts],
            target_used: vec![false; p.target_rels.len()],
            chosen: vec![None; p.base_rels.len()],
            count: 0,
            adjacent: 0,
        }
    }

    fn compatible(&self, b: u32, t: u32) -> bool {
        let mb = self.map_bt[b as usize];
        if mb != UNMAPPED {
            return mb == t;
        }
        self.map_tb[t as usize] == UNMAPPED
    }

    fn can_add(&self, p: &Problem, bi: usize, ti: u32) -> bool {
        if self.target_used[ti as usize] || self.chosen[bi].is_some() {
            return false;
        }
        let (bh, bt) = p.base_ends[bi];
        let (th, tt) = p.target_ends[ti as usize];
        self.compatible(bh, th) && self.compatible(bt, tt)
    }

    fn bind(&mut self, b: u32, t: u32) {
        self.uses[b as usize] += 1;
        self.map_bt[b as usize] = t;
        self.map_tb[t as usize] = b;
    }

    fn unbind(&mut self, b: u32) {
        self.uses[b as usize] -= 1;
        if self.uses[b as usize] == 0 {
            let t = self.map_bt[b as usize];
            self.map_bt[b as usize] = UNMAPPED;
            self.map_tb[t as usize] = UNMAPPED;
        }
    }

    fn add(&mut self, p: &Problem, bi: usize, ti: u32) {
        let (bh, bt) = p.base_ends[bi];
        let (th, tt) = p.target_ends[ti as usize];
        self.bind(bh, th);
        self.bind(bt, tt);
        self.target_used[ti as usize] = true;
        self.adjacent += p.adjacent[bi]
            .iter()
            .filter(|&&j| self.chosen[j].is_some())
            .count();
        self.chosen[bi] = Some(ti);
        self.count += 1;
    }

    fn remove(&mut self, p: &Problem, bi: usize, ti: u32) {
        let (bh, bt) = p.base_ends[bi];
        self.chosen[bi] = None;
        self.count -= 1;
        self.adjacent -= p.adjacent[bi]
            .iter()
            .filter(|&&j| self.chosen[j].is_some())
            .count();
        self.target_used[ti as usize] = false;
        self.unbind(bh);
        self.unbind(bt);
    }

    fn candidate(&self, p: &Problem) -> Candidate {
        let pairs: Vec<(usize, u32)> = self
            .chosen
            .iter()
            .enumerate()
            .filter_map(|(bi, t)| t.map(|t| (bi, t)))
            .collect();
        let table = self
            .map_bt
            .iter()
            .enumerate()
            .filter(|(_, &t)| t != UNMAPPED)
            .map(|(b, &t)| (b as u32, t))
            .collect();
        Candidate {
            score: p.w.combine(pairs.len(), self.adjacent),
            adjacent: self.adjacent,
            pairs,
            table,
        }
    }
}
