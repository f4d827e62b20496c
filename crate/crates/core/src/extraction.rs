//! Diagnosis-string extraction and trimming.
//!
//! A diagnosis section is a line starting with one of the section keywords,
//! optionally followed by `:`. The diagnosis is the rest of that line, or the
//! next non-blank line when the heading stands alone. Trimming then removes
//! advice clauses that leak into the sentence.

use std::collections::HashSet;
use std::path::Path;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::{strip_boilerplate, Corpus};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosisString {
    pub letter_id: String,
    /// Text as found in the stripped letter.
    pub raw: String,
    /// `raw` after trimming rules; only removals are applied.
    pub trimmed: String,
    /// Character offsets `[start, end)` of `raw` within the stripped text.
    pub span: (usize, usize),
}

/// Raw extraction result before trimming.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDiagnosis {
    pub raw: String,
    pub span: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionRules {
    /// Section triggers; longer triggers take precedence over their prefixes.
    pub section_keywords: Vec<String>,
    /// Each match is removed up to and including the next `.` or `;`.
    pub trim_keywords: Vec<String>,
    /// Regexes removed as whole matches.
    #[serde(default)]
    pub trim_patterns: Vec<String>,
}

impl Default for ExtractionRules {
    fn default() -> Self {
        ExtractionRules {
            section_keywords: ["diagnosi", "diagnosi di dimissione", "diagnosi alla dimissione", "diagnosi testuale"]
                .map(String::from)
                .to_vec(),
            trim_keywords: ["decorso clinico", "consigli terapeutici", "consiglio", "controllo", "a domicilio"]
                .map(String::from)
                .to_vec(),
            trim_patterns: vec![r"paziente:\s*\(\s*id:\s*\d*\s*\)".to_string()],
        }
    }
}

impl ExtractionRules {
    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let rules: ExtractionRules = serde_json::from_str(&raw)?;
        rules.compile()?;
        Ok(rules)
    }

    /// Validate and build the matchers.
    pub fn compile(&self) -> Result<CompiledRules> {
        if self.section_keywords.iter().any(|k| k.trim().is_empty()) || self.section_keywords.is_empty() {
            return Err(Error::InvalidConfig("section keywords must be non-empty".into()));
        }
        let mut sections: Vec<String> = self.section_keywords.iter().map(|k| k.trim().to_lowercase()).collect();
        // Longest first so "diagnosi di dimissione" wins over "diagnosi".
        sections.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        sections.dedup();

        let keyword_re = if self.trim_keywords.is_empty() {
            None
        } else {
            let alternatives: Vec<String> = self.trim_keywords.iter().map(|k| regex::escape(k.trim())).collect();
            Some(
                Regex::new(&format!(r"(?i)\b(?:{})", alternatives.join("|")))
                    .map_err(|e| Error::InvalidConfig(format!("trim keywords: {e}")))?,
            )
        };
        let patterns = self
            .trim_patterns
            .iter()
            .map(|p| Regex::new(&format!("(?i){p}")).map_err(|e| Error::InvalidConfig(format!("trim pattern {p:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(CompiledRules {
            sections,
            keyword_re,
            patterns,
        })
    }
}

#[derive(Debug, Clone)]
pub struct CompiledRules {
    sections: Vec<String>,
    keyword_re: Option<Regex>,
    patterns: Vec<Regex>,
}

/// Byte offset just past a section trigger at the start of `content`.
fn match_trigger(content: &str, sections: &[String]) -> Option<usize> {
    sections.iter().find_map(|kw| {
        let bytes = content.as_bytes();
        if bytes.len() < kw.len() || !bytes[..kw.len()].eq_ignore_ascii_case(kw.as_bytes()) {
            return None;
        }
        let next = content[kw.len()..].chars().next();
        match next {
            None => Some(kw.len()),
            Some(c) if c == ':' || c.is_whitespace() => Some(kw.len()),
            _ => None,
        }
    })
}

fn char_offset(text: &str, byte: usize) -> usize {
    text[..byte].chars().count()
}

/// Find the first diagnosis section in boilerplate-stripped text.
pub fn extract_diagnosis(text: &str, rules: &CompiledRules) -> Option<RawDiagnosis> {
    let mut lines = Vec::new();
    let mut offset = 0;
    for line in text.split('\n') {
        lines.push((offset, line));
        offset += line.len() + 1;
    }

    for (idx, &(line_start, line)) in lines.iter().enumerate() {
        let indent = line.len() - line.trim_start().len();
        let content = &line[indent..];
        let Some(after_kw) = match_trigger(content, &rules.sections) else {
            continue;
        };
        let rest = &content[after_kw..];
        let rest_trimmed = rest.trim_start();
        let rest_trimmed = rest_trimmed.strip_prefix(':').unwrap_or(rest_trimmed).trim();
        if !rest_trimmed.is_empty() {
            let start = line_start + indent + after_kw + (rest.len() - rest.trim_start().len());
            let start = start + (rest.trim_start().len() - rest.trim_start().strip_prefix(':').unwrap_or(rest.trim_start()).len());
            let start = start + (text[start..].len() - text[start..].trim_start().len());
            let end = start + rest_trimmed.len();
            return Some(span_of(text, start, end));
        }
        // Heading alone: take the next non-blank line unless it is itself a heading.
        let next = lines[idx + 1..].iter().find(|(_, l)| !l.trim().is_empty());
        return match next {
            Some(&(next_start, next_line)) => {
                let body = next_line.trim();
                if body.ends_with(':') || match_trigger(body, &rules.sections).is_some() {
                    return None;
                }
                let start = next_start + (next_line.len() - next_line.trim_start().len());
                Some(span_of(text, start, start + body.len()))
            }
            None => None,
        };
    }
    None
}

fn span_of(text: &str, start: usize, end: usize) -> RawDiagnosis {
    RawDiagnosis {
        raw: text[start..end].to_string(),
        span: (char_offset(text, start), char_offset(text, end)),
    }
}

/// Remove advice clauses and identifiers from a raw diagnosis. Returns `None`
/// when no alphanumeric content survives.
pub fn trim_diagnosis(raw: &str, rules: &CompiledRules) -> Option<String> {
    let mut current = raw.to_string();
    loop {
        let mut changed = false;
        if let Some(re) = &rules.keyword_re {
            if let Some(m) = re.find(&current) {
                let tail = &current[m.end()..];
                let end = tail.find(['.', ';']).map_or(current.len(), |i| m.end() + i + 1);
                current.replace_range(m.start()..end, "");
                changed = true;
            }
        }
        for re in &rules.patterns {
            if let Some(m) = re.find(&current) {
                current.replace_range(m.range(), "");
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let collapsed = collapse_whitespace(&current);
    collapsed.chars().any(char::is_alphanumeric).then_some(collapsed)
}

/// Drop every whitespace char that follows another one, then trim the ends.
fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut prev_ws = false;
    for c in s.chars() {
        let ws = c.is_whitespace();
        if !(ws && prev_ws) {
            out.push(c);
        }
        prev_ws = ws;
    }
    out.trim().to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    /// Surviving diagnoses in corpus order.
    pub diagnoses: Vec<DiagnosisString>,
    /// Letters with a surviving trimmed string over all letters.
    pub coverage: f64,
    pub unique_trimmed: usize,
    pub n_letters: usize,
}

impl Extraction {
    pub fn get(&self, letter_id: &str) -> Option<&DiagnosisString> {
        self.diagnoses.iter().find(|d| d.letter_id == letter_id)
    }
}

/// Strip, extract and trim every letter of the corpus.
pub fn extract_all(corpus: &Corpus, rules: &ExtractionRules) -> Result<Extraction> {
    let compiled = rules.compile()?;
    let diagnoses: Vec<DiagnosisString> = corpus
        .letters()
        .par_iter()
        .filter_map(|letter| {
            let stripped = strip_boilerplate(&letter.text);
            let raw = extract_diagnosis(&stripped, &compiled)?;
            let trimmed = trim_diagnosis(&raw.raw, &compiled)?;
            Some(DiagnosisString {
                letter_id: letter.id.clone(),
                raw: raw.raw,
                trimmed,
                span: raw.span,
            })
        })
        .collect();
    let unique: HashSet<&str> = diagnoses.iter().map(|d| d.trimmed.as_str()).collect();
    let coverage = if corpus.is_empty() {
        0.0
    } else {
        diagnoses.len() as f64 / corpus.len() as f64
    };
    Ok(Extraction {
        unique_trimmed: unique.len(),
        coverage,
        n_letters: corpus.len(),
        diagnoses,
    })
}

/// Slice `text` by character offsets.
pub fn slice_chars(text: &str, (start, end): (usize, usize)) -> &str {
    let mut indices = text.char_indices().map(|(i, _)| i).chain(std::iter::once(text.len()));
    let s = indices.nth(start).unwrap_or(text.len());
    let e = if end > start {
        indices.nth(end - start - 1).unwrap_or(text.len())
    } else {
        s
    };
    &text[s..e]
}
