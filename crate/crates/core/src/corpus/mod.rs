//! Letters, corpora and JSONL ingestion.

mod boilerplate;
mod synth;

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use boilerplate::{
    detect_pediatric, strip_boilerplate, BoilerplateMarker, BOILERPLATE_MARKERS,
    HEADER_KEPT_LINES, PEDIATRIC_KEYWORDS,
};
pub use synth::{generate_synthetic, DiseaseTemplates, SynthesisConfig};

/// Group id assigned when a letter carries no hospital or LHU id.
pub const UNKNOWN_GROUP: &str = "UNKNOWN";

/// One discharge letter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Letter {
    pub id: String,
    pub hospital_id: String,
    pub lhu_id: String,
    pub date: Option<NaiveDate>,
    pub text: String,
    pub gold_label: Option<bool>,
    is_pediatric: bool,
}

impl Letter {
    pub fn new(
        id: impl Into<String>,
        hospital_id: impl Into<String>,
        lhu_id: impl Into<String>,
        date: Option<NaiveDate>,
        text: impl Into<String>,
        gold_label: Option<bool>,
    ) -> Result<Self> {
        let id = id.into();
        let text = text.into();
        if id.is_empty() {
            return Err(Error::InvalidConfig("letter id must not be empty".into()));
        }
        if text.is_empty() {
            return Err(Error::InvalidConfig(format!("letter {id} has empty text")));
        }
        let is_pediatric = detect_pediatric(&text);
        Ok(Letter {
            id,
            hospital_id: hospital_id.into(),
            lhu_id: lhu_id.into(),
            date,
            text,
            gold_label,
            is_pediatric,
        })
    }

    pub fn is_pediatric(&self) -> bool {
        self.is_pediatric
    }

    /// The letter text with header and footer boilerplate removed.
    pub fn stripped_text(&self) -> String {
        strip_boilerplate(&self.text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Ingested,
    Synthetic,
}

/// An ordered, duplicate-free collection of letters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    letters: Vec<Letter>,
    provenance: Provenance,
    seed: Option<u64>,
}

impl Corpus {
    pub fn new(letters: Vec<Letter>, provenance: Provenance, seed: Option<u64>) -> Result<Self> {
        if (provenance == Provenance::Synthetic) != seed.is_some() {
            return Err(Error::InvalidConfig(
                "a corpus carries a seed iff it is synthetic".into(),
            ));
        }
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (i, letter) in letters.iter().enumerate() {
            if let Some(first) = seen.insert(&letter.id, i) {
                return Err(Error::DuplicateId {
                    id: letter.id.clone(),
                    first_line: first + 1,
                    second_line: i + 1,
                });
            }
        }
        Ok(Corpus {
            letters,
            provenance,
            seed,
        })
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Letter> {
        self.letters.iter()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn get(&self, id: &str) -> Option<&Letter> {
        self.letters.iter().find(|l| l.id == id)
    }

    /// Read a JSONL corpus from disk.
    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(BufReader::new(file)).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }

    pub fn from_reader(reader: impl BufRead) -> Result<Self> {
        let mut letters = Vec::new();
        let mut lines_of: HashMap<String, usize> = HashMap::new();
        let mut seed = None;
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::io("<corpus>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: LetterRecord = serde_json::from_str(&line).map_err(|e| Error::Line {
                line: line_no,
                message: format!("invalid JSON: {e}"),
            })?;
            let Some(id) = record.id else {
                if record.synthetic_seed.is_some() && record.text.is_none() {
                    seed = record.synthetic_seed;
                    continue;
                }
                return Err(missing(line_no, "id"));
            };
            let text = record.text.ok_or_else(|| missing(line_no, "text"))?;
            if text.is_empty() {
                return Err(Error::Line {
                    line: line_no,
                    message: "empty text".into(),
                });
            }
            if let Some(&first) = lines_of.get(&id) {
                return Err(Error::DuplicateId {
                    id,
                    first_line: first,
                    second_line: line_no,
                });
            }
            lines_of.insert(id.clone(), line_no);
            let letter = Letter::new(
                id,
                record.hospital_id.unwrap_or_else(|| UNKNOWN_GROUP.to_string()),
                record.lhu_id.unwrap_or_else(|| UNKNOWN_GROUP.to_string()),
                record.date,
                text,
                record.gold_label,
            )
            .map_err(|e| Error::Line {
                line: line_no,
                message: e.to_string(),
            })?;
            letters.push(letter);
        }
        let provenance = if seed.is_some() {
            Provenance::Synthetic
        } else {
            Provenance::Ingested
        };
        Corpus::new(letters, provenance, seed)
    }

    /// Write the corpus as JSONL; synthetic corpora get a leading seed object.
    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        if let Some(seed) = self.seed {
            writeln!(out, "{}", serde_json::json!({ "_synthetic_seed": seed }))?;
        }
        for letter in &self.letters {
            let record = LetterRecord {
                id: Some(letter.id.clone()),
                hospital_id: Some(letter.hospital_id.clone()),
                lhu_id: Some(letter.lhu_id.clone()),
                date: letter.date,
                text: Some(letter.text.clone()),
                gold_label: letter.gold_label,
                synthetic_seed: None,
            };
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write_jsonl(&mut out).map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Letter;
    type IntoIter = std::slice::Iter<'a, Letter>;

    fn into_iter(self) -> Self::IntoIter {
        self.letters.iter()
    }
}

fn missing(line: usize, field: &str) -> Error {
    Error::Line {
        line,
        message: format!("missing field {field}"),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct LetterRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hospital_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lhu_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    date: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gold_label: Option<bool>,
    #[serde(
        rename = "_synthetic_seed",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    synthetic_seed: Option<u64>,
}
