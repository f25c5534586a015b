//! Commonsense knowledge base: loading, score filtering and the structural
//! queries that constrain every variation operator.
//!
//! Assertions come from a flat UTF-8 TSV file with one
//! `label<TAB>head<TAB>tail<TAB>score` line per assertion. Lines starting
//! with `#` and blank lines are ignored. Only assertions whose reliability
//! score reaches the load-time threshold are kept.

pub mod conceptnet;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use rand::Rng;

use crate::concept::{Concept, Position, Relation, RelationLabel};
use crate::semnet::SemanticNetwork;

/// Score assigned to IsA assertions flattened from a lexical hierarchy.
pub const LEXICAL_ISA_SCORE: f64 = 10.0;

#[derive(Debug, thiserror::Error)]
pub enum KbError {
    #[error("cannot read knowledge base {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("knowledge base has no concepts")]
    NoConcepts,
}

/// One commonsense fact with its reliability score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredAssertion {
    pub relation: Relation,
    pub score: f64,
}

/// Counters collected while loading a knowledge base.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub lines: usize,
    pub kept: usize,
    pub below_threshold: usize,
    pub duplicates: usize,
    pub self_loops: usize,
    pub negative: usize,
    pub warnings: usize,
}

/// Indexed, read-only store of scored assertions.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    r_min: f64,
    assertions: BTreeMap<Relation, f64>,
    // Per concept, sorted by (label, other concept, position).
    by_concept: HashMap<Concept, Vec<Relation>>,
    by_concept_label: HashMap<(Concept, RelationLabel, Position), Vec<Relation>>,
    concepts: Vec<Concept>,
    report: LoadReport,
}

/// Load and filter a TSV knowledge base file.
pub fn load_kb(path: impl AsRef<Path>, r_min: f64) -> Result<KnowledgeBase, KbError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| KbError::Io {
        path: path.to_owned(),
        source,
    })?;
    KnowledgeBase::from_reader(BufReader::new(file), r_min).map_err(|e| match e {
        KbError::Io { source, .. } => KbError::Io {
            path: path.to_owned(),
            source,
        },
        other => other,
    })
}

/// Parse one TSV line. Returns `None` for comments and blank lines.
pub fn parse_tsv_line(line: &str) -> Result<Option<(Relation, f64)>, String> {
    let trimmed = line.trim_end_matches(['\r', '\n']);
    if trimmed.trim().is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let fields: Vec<&str> = trimmed.split('\t').collect();
    if fields.len() != 4 {
        return Err(format!(
            "expected 4 tab-separated fields, found {}",
            fields.len()
        ));
    }
    let label = RelationLabel::new(fields[0]).map_err(|e| e.to_string())?;
    let head = Concept::new(fields[1]).map_err(|e| e.to_string())?;
    let tail = Concept::new(fields[2]).map_err(|e| e.to_string())?;
    let score: f64 = fields[3]
        .trim()
        .parse()
        .map_err(|_| format!("invalid score {:?}", fields[3].trim()))?;
    if !score.is_finite() {
        return Err(format!("non-finite score {:?}", fields[3].trim()));
    }
    Ok(Some((Relation::new(label, head, tail), score)))
}

/// Write assertions in canonical TSV form.
pub fn write_tsv<'a, W: Write>(
    mut out: W,
    assertions: impl IntoIterator<Item = (&'a Relation, f64)>,
) -> io::Result<()> {
    for (r, score) in assertions {
        writeln!(out, "{}\t{}\t{}\t{}", r.label, r.head, r.tail, score)?;
    }
    Ok(())
}

impl KnowledgeBase {
    pub fn from_reader<R: Read>(reader: R, r_min: f64) -> Result<Self, KbError> {
        let reader = BufReader::new(reader);
        let mut raw = Vec::new();
        let mut lines = 0;
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|source| KbError::Io {
                path: PathBuf::new(),
                source,
            })?;
            lines += 1;
            match parse_tsv_line(&line) {
                Ok(Some(entry)) => raw.push(entry),
                Ok(None) => {}
                Err(reason) => {
                    return Err(KbError::Malformed {
                        line: idx + 1,
                        reason,
                    })
                }
            }
        }
        let mut kb = Self::from_assertions(raw, r_min);
        kb.report.lines = lines;
        Ok(kb)
    }

    /// Build from in-memory assertions, applying the same filtering as file
    /// loading: self-loops and negative scores are dropped, scores below
    /// `r_min` are dropped, duplicate triples keep their maximum score.
    pub fn from_assertions(items: impl IntoIterator<Item = (Relation, f64)>, r_min: f64) -> Self {
        let mut report = LoadReport::default();
        let mut assertions: BTreeMap<Relation, f64> = BTreeMap::new();
        for (relation, score) in items {
            if relation.is_self_loop() {
                report.self_loops += 1;
                continue;
            }
            if score < 0.0 {
                report.negative += 1;
                continue;
            }
            if score < r_min {
                report.below_threshold += 1;
                continue;
            }
            match assertions.get_mut(&relation) {
                Some(existing) => {
                    report.duplicates += 1;
                    if score > *existing {
                        *existing = score;
                    }
                }
                None => {
                    assertions.insert(relation, score);
                }
            }
        }
        report.kept = assertions.len();
        if assertions.is_empty() {
            report.warnings += 1;
            log::warn!("knowledge base is empty after filtering at r_min = {r_min}");
        }

        let mut by_concept: HashMap<Concept, Vec<Relation>> = HashMap::new();
        let mut by_concept_label: HashMap<(Concept, RelationLabel, Position), Vec<Relation>> =
            HashMap::new();
        for r in assertions.keys() {
            for (c, pos) in [(&r.head, Position::Head), (&r.tail, Position::Tail)] {
                by_concept.entry(c.clone()).or_default().push(r.clone());
                by_concept_label
                    .entry((c.clone(), r.label.clone(), pos))
                    .or_default()
                    .push(r.clone());
            }
        }
        for (c, rels) in by_concept.iter_mut() {
            rels.sort_by(|a, b| involving_key(a, c).cmp(&involving_key(b, c)));
        }
        let mut concepts: Vec<Concept> = by_concept.keys().cloned().collect();
        concepts.sort();

        KnowledgeBase {
            r_min,
            assertions,
            by_concept,
            by_concept_label,
            concepts,
            report,
        }
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn report(&self) -> &LoadReport {
        &self.report
    }

    pub fn len(&self) -> usize {
        self.assertions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assertions.is_empty()
    }

    pub fn contains(&self, r: &Relation) -> bool {
        self.assertions.contains_key(r)
    }

    pub fn score(&self, r: &Relation) -> Option<f64> {
        self.assertions.get(r).copied()
    }

    pub fn has_concept(&self, c: &Concept) -> bool {
        self.by_concept.contains_key(c)
    }

    /// Distinct concepts in sorted order.
    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    /// All assertions in canonical order.
    pub fn assertions(&self) -> impl Iterator<Item = ScoredAssertion> + '_ {
        self.assertions.iter().map(|(r, &score)| ScoredAssertion {
            relation: r.clone(),
            score,
        })
    }

    /// Relations with `c` as head or tail, sorted by label, then by the
    /// other concept.
    pub fn assertions_involving(&self, c: &Concept) -> &[Relation] {
        self.by_concept.get(c).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Relations with `label` where `c` sits at `pos`.
    pub fn assertions_at(&self, c: &Concept, label: &RelationLabel, pos: Position) -> &[Relation] {
        self.by_concept_label
            .get(&(c.clone(), label.clone(), pos))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Every (assertion, new concept) pair where the assertion links a
    /// concept outside `net` to a concept inside it.
    pub fn attachable_concepts(&self, net: &SemanticNetwork) -> Vec<(Relation, Concept)> {
        let mut out = BTreeSet::new();
        for c in net.concepts() {
            for r in self.assertions_involving(c) {
                let other = r.other(c).expect("indexed relation involves its key");
                if !net.contains_concept(other) {
                    out.insert((r.clone(), other.clone()));
                }
            }
        }
        out.into_iter().collect()
    }

    /// Interchangeability with the default requirement of one substitutable
    /// relation in each direction.
    pub fn interchangeable(
        &self,
        a: &Concept,
        rels_a: &[Relation],
        b: &Concept,
        rels_b: &[Relation],
    ) -> bool {
        self.interchangeable_min(a, rels_a, b, rels_b, 1)
    }

    /// True iff `a` can take `b`'s place in at least `min_shared` of
    /// `rels_b`, and `b` can take `a`'s place in at least `min_shared` of
    /// `rels_a`, where "can" means the rewritten relation is a KB assertion.
    pub fn interchangeable_min(
        &self,
        a: &Concept,
        rels_a: &[Relation],
        b: &Concept,
        rels_b: &[Relation],
        min_shared: usize,
    ) -> bool {
        if a == b {
            return false;
        }
        let min_shared = min_shared.max(1);
        self.substitutable_count(b, a, rels_b) >= min_shared
            && self.substitutable_count(a, b, rels_a) >= min_shared
    }

    /// Number of relations of `from` that stay KB-backed once `from` is
    /// replaced by `to`.
    pub fn substitutable_count(&self, from: &Concept, to: &Concept, rels: &[Relation]) -> usize {
        rels.iter()
            .filter(|r| r.involves(from))
            .filter(|r| self.contains(&r.substitute(from, to)))
            .count()
    }

    /// KB concepts interchangeable with `a`, where `a`'s relations are
    /// `rels_a` and each candidate's relations are its KB assertions.
    /// Sorted and without `a` itself.
    pub fn interchangeable_concepts(
        &self,
        a: &Concept,
        rels_a: &[Relation],
        min_shared: usize,
    ) -> Vec<Concept> {
        let mut candidates = BTreeSet::new();
        for r in rels_a {
            let (pos, other) = match r.position_of(a) {
                Some(Position::Head) => (Position::Head, &r.tail),
                Some(Position::Tail) => (Position::Tail, &r.head),
                None => continue,
            };
            let other_pos = match pos {
                Position::Head => Position::Tail,
                Position::Tail => Position::Head,
            };
            for cand in self.assertions_at(other, &r.label, other_pos) {
                let b = match pos {
                    Position::Head => &cand.head,
                    Position::Tail => &cand.tail,
                };
                if b != a {
                    candidates.insert(b.clone());
                }
            }
        }
        candidates
            .into_iter()
            .filter(|b| {
                self.interchangeable_min(a, rels_a, b, self.assertions_involving(b), min_shared)
            })
            .collect()
    }

    /// Uniform draw over the distinct concepts of the KB.
    pub fn random_concept<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Concept, KbError> {
        if self.concepts.is_empty() {
            return Err(KbError::NoConcepts);
        }
        Ok(self.concepts[rng.gen_range(0..self.concepts.len())].clone())
    }
}

fn involving_key<'a>(r: &'a Relation, c: &Concept) -> (&'a RelationLabel, &'a Concept, Position) {
    match r.position_of(c) {
        Some(Position::Head) => (&r.label, &r.tail, Position::Head),
        _ => (&r.label, &r.head, Position::Tail),
    }
}
