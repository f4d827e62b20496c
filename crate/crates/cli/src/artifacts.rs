//! Row types of the CSV artifacts passed between stages.

use std::path::Path;

use anyhow::{bail, Context, Result};
use diagweak_core::extraction::Extraction;
use diagweak_core::{Corpus, DiagnosisString};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionRow {
    pub letter_id: String,
    pub span_start: usize,
    pub span_end: usize,
    pub raw: String,
    pub trimmed: String,
}

impl From<&DiagnosisString> for ExtractionRow {
    fn from(d: &DiagnosisString) -> Self {
        ExtractionRow {
            letter_id: d.letter_id.clone(),
            span_start: d.span.0,
            span_end: d.span.1,
            raw: d.raw.clone(),
            trimmed: d.trimmed.clone(),
        }
    }
}

impl From<ExtractionRow> for DiagnosisString {
    fn from(r: ExtractionRow) -> Self {
        DiagnosisString {
            letter_id: r.letter_id,
            raw: r.raw,
            trimmed: r.trimmed,
            span: (r.span_start, r.span_end),
        }
    }
}

/// One unique normalised diagnosis string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StringRow {
    pub string_id: usize,
    pub text: String,
    pub n_letters: usize,
}

/// The unique string of each letter, in corpus order; empty when the letter
/// has no usable diagnosis string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LetterStringRow {
    pub letter_id: String,
    pub string_id: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentRow {
    pub string_id: usize,
    /// `-1` for noise.
    pub label: i64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeakLabelRow {
    pub letter_id: String,
    pub label: u8,
    pub cluster_id: Option<usize>,
    pub fired_definition: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterRow {
    pub level: u8,
    pub cluster_id: usize,
    pub size: usize,
    /// Alphabetical, space-separated.
    pub keywords: String,
    pub children: String,
    pub flagged: bool,
}

pub fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.with_context(|| format!("{}: record {}", path.display(), i + 1)))
        .collect()
}

/// Rebuild an extraction from its CSV rows.
pub fn extraction_from_rows(corpus: &Corpus, rows: Vec<ExtractionRow>) -> Result<Extraction> {
    let diagnoses: Vec<DiagnosisString> = rows.into_iter().map(Into::into).collect();
    if let Some(d) = diagnoses.iter().find(|d| corpus.get(&d.letter_id).is_none()) {
        bail!("extraction names letter {} which is not in the corpus", d.letter_id);
    }
    let unique: std::collections::BTreeSet<&str> = diagnoses.iter().map(|d| d.trimmed.as_str()).collect();
    Ok(Extraction {
        unique_trimmed: unique.len(),
        coverage: if corpus.is_empty() {
            0.0
        } else {
            diagnoses.len() as f64 / corpus.len() as f64
        },
        n_letters: corpus.len(),
        diagnoses,
    })
}

/// Weak labels aligned with corpus order.
pub fn weak_labels_for(corpus: &Corpus, rows: &[WeakLabelRow]) -> Result<Vec<bool>> {
    if rows.len() != corpus.len() || rows.iter().zip(corpus.iter()).any(|(r, l)| r.letter_id != l.id) {
        bail!("weak labels do not match the corpus letters");
    }
    Ok(rows.iter().map(|r| r.label == 1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_with_quotes_and_newlines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let rows = vec![
            ExtractionRow {
                letter_id: "a".into(),
                span_start: 3,
                span_end: 9,
                raw: "bronchiolite, \"acuta\"\nlieve".into(),
                trimmed: "bronchiolite".into(),
            },
            ExtractionRow {
                letter_id: "b".into(),
                span_start: 0,
                span_end: 1,
                raw: "x".into(),
                trimmed: "x".into(),
            },
        ];
        write_csv(&path, &rows).unwrap();
        assert_eq!(read_csv::<ExtractionRow>(&path).unwrap(), rows);

        let labels = vec![
            WeakLabelRow {
                letter_id: "a".into(),
                label: 1,
                cluster_id: Some(2),
                fired_definition: Some("bronchiolite".into()),
            },
            WeakLabelRow {
                letter_id: "b".into(),
                label: 0,
                cluster_id: None,
                fired_definition: None,
            },
        ];
        write_csv(&path, &labels).unwrap();
        assert_eq!(read_csv::<WeakLabelRow>(&path).unwrap(), labels);
    }
}
