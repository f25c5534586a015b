//! Conversion of ConceptNet-style CSV dumps into the knowledge base TSV.
//!
//! Each input row carries `relation, concept1, concept2, score`. URI forms
//! such as `/r/IsA` and `/c/en/ice_cream/n` are reduced to `IsA` and
//! `ice cream`. A leading header row is skipped when its score column does
//! not parse.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::concept::{Concept, Relation, RelationLabel};

#[derive(Debug, thiserror::Error)]
pub enum ConvertError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{malformed} of {rows} rows are malformed")]
    TooManyMalformed { malformed: usize, rows: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConvertReport {
    pub rows: usize,
    pub malformed: usize,
    pub below_threshold: usize,
    pub self_loops: usize,
    pub duplicates: usize,
    pub written: usize,
}

fn strip_relation(raw: &str) -> &str {
    let raw = raw.trim();
    raw.strip_prefix("/r/").unwrap_or(raw)
}

fn strip_concept(raw: &str) -> String {
    let raw = raw.trim();
    let text = match raw.strip_prefix("/c/") {
        // /c/<lang>/<text>[/<pos>...]
        Some(rest) => rest.split('/').nth(1).unwrap_or(""),
        None => raw,
    };
    text.replace('_', " ")
}

fn parse_row(record: &csv::StringRecord) -> Option<(Relation, f64)> {
    if record.len() != 4 {
        return None;
    }
    let label = RelationLabel::new(strip_relation(&record[0])).ok()?;
    let head = Concept::new(&strip_concept(&record[1])).ok()?;
    let tail = Concept::new(&strip_concept(&record[2])).ok()?;
    let score: f64 = record[3].trim().parse().ok()?;
    score
        .is_finite()
        .then(|| (Relation::new(label, head, tail), score))
}

/// Convert CSV rows from `input` into canonical TSV on `output`.
///
/// Rows scoring below `r_min` (and negative rows) are dropped, duplicates
/// keep their maximum score. Malformed rows are counted and skipped; if
/// more than half of the rows are malformed the conversion fails without
/// writing anything.
pub fn convert_conceptnet<R: Read, W: Write>(
    input: R,
    mut output: W,
    r_min: f64,
) -> Result<ConvertReport, ConvertError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut report = ConvertReport::default();
    let mut kept: BTreeMap<Relation, f64> = BTreeMap::new();

    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let parsed = parse_row(&record);
        if idx == 0 && parsed.is_none() && record.len() == 4 {
            // header row
            continue;
        }
        report.rows += 1;
        let Some((relation, score)) = parsed else {
            report.malformed += 1;
            continue;
        };
        if relation.is_self_loop() {
            report.self_loops += 1;
            continue;
        }
        if score < 0.0 || score < r_min {
            report.below_threshold += 1;
            continue;
        }
        match kept.get_mut(&relation) {
            Some(s) => {
                report.duplicates += 1;
                *s = s.max(score);
            }
            None => {
                kept.insert(relation, score);
            }
        }
    }

    if report.malformed * 2 > report.rows {
        return Err(ConvertError::TooManyMalformed {
            malformed: report.malformed,
            rows: report.rows,
        });
    }
    super::write_tsv(&mut output, kept.iter().map(|(r, &s)| (r, s)))?;
    report.written = kept.len();
    Ok(report)
}
