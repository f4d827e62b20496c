//! Loading vectors computed outside the pipeline.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;

use super::EmbeddingVector;
use crate::error::{Error, Result};

#[derive(Deserialize)]
struct Record {
    id: String,
    vector: Vec<f64>,
}

/// Read a JSONL file of `{id, vector}` records. Every expected id must be
/// present exactly once with a shared dimension; vectors are re-normalised.
/// Records for ids outside `expected_ids` are skipped.
pub fn load_external_embeddings(
    path: &Path,
    expected_ids: &BTreeSet<String>,
) -> Result<BTreeMap<String, EmbeddingVector>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_external_embeddings(BufReader::new(file), expected_ids).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn parse_external_embeddings(
    reader: impl BufRead,
    expected_ids: &BTreeSet<String>,
) -> Result<BTreeMap<String, EmbeddingVector>> {
    let mut out = BTreeMap::new();
    let mut dim = None;
    let mut skipped = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<embeddings>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line).map_err(|e| Error::Line {
            line: idx + 1,
            message: format!("invalid embedding record: {e}"),
        })?;
        if !expected_ids.contains(&record.id) {
            skipped += 1;
            continue;
        }
        let expected = *dim.get_or_insert(record.vector.len());
        if record.vector.len() != expected {
            return Err(Error::RaggedDimensions {
                id: record.id,
                expected,
                found: record.vector.len(),
            });
        }
        if out.contains_key(&record.id) {
            return Err(Error::DuplicateEmbedding(record.id));
        }
        let vector = EmbeddingVector::new(record.vector)
            .map_err(|e| Error::Parameter(format!("id={}: {e}", record.id)))?
            .normalized()
            .map_err(|_| Error::Parameter(format!("id={}: zero vector", record.id)))?;
        out.insert(record.id, vector);
    }
    if let Some(missing) = expected_ids.iter().find(|id| !out.contains_key(*id)) {
        return Err(Error::MissingEmbedding(missing.clone()));
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} embedding records with unknown ids");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(list: &[&str]) -> BTreeSet<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    fn line(id: &str, dim: usize) -> String {
        let v: Vec<f64> = (0..dim).map(|i| (i % 5) as f64 + 1.0).collect();
        serde_json::json!({ "id": id, "vector": v }).to_string()
    }

    #[test]
    fn loads_all_and_renormalises() {
        let text = [line("a", 768), line("b", 768), line("zz", 768)].join("\n");
        let map = parse_external_embeddings(text.as_bytes(), &ids(&["a", "b"])).unwrap();
        assert_eq!(map.len(), 2);
        assert!((map["a"].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn missing_id() {
        let text = line("a", 8);
        let err = parse_external_embeddings(text.as_bytes(), &ids(&["a", "X"])).unwrap_err();
        assert_eq!(err.to_string(), "missing embedding for id=X");
    }

    #[test]
    fn ragged_dims() {
        let text = [line("a", 768), line("b", 512)].join("\n");
        let err = parse_external_embeddings(text.as_bytes(), &ids(&["a", "b"])).unwrap_err();
        assert!(matches!(err, Error::RaggedDimensions { ref id, expected: 768, found: 512 } if id == "b"));
    }

    #[test]
    fn duplicate_id() {
        let text = [line("a", 8), line("a", 8)].join("\n");
        let err = parse_external_embeddings(text.as_bytes(), &ids(&["a"])).unwrap_err();
        assert!(matches!(err, Error::DuplicateEmbedding(ref id) if id == "a"));
    }
}
