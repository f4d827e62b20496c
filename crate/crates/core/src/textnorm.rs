//! Normalisation of diagnosis strings and letter text.
//!
//! Lowercases, replaces punctuation and digits with spaces, splits on
//! whitespace and optionally expands short medical abbreviations. Accented
//! Latin letters are preserved; an apostrophe is punctuation, so
//! `difficolta'` becomes `difficolta`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered lowercase word tokens containing only `[a-zà-ÿ]` letters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenList(Vec<String>);

impl TokenList {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    /// Space-joined form, used as the dedup key for diagnosis strings.
    pub fn joined(&self) -> String {
        self.0.join(" ")
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.iter().any(|t| t == token)
    }

    pub fn truncated(mut self, max_tokens: usize) -> Self {
        self.0.truncate(max_tokens);
        self
    }

    /// Consecutive pieces of at most `size` tokens. An empty list yields one
    /// empty chunk.
    pub fn chunks(&self, size: usize) -> Vec<TokenList> {
        assert!(size >= 1, "chunk size must be positive");
        if self.0.is_empty() {
            return vec![TokenList::default()];
        }
        self.0.chunks(size).map(|c| TokenList(c.to_vec())).collect()
    }
}

impl<'a> IntoIterator for &'a TokenList {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Short token (2 or 3 letters) to expansion phrase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct AbbreviationTable {
    entries: BTreeMap<String, String>,
}

impl AbbreviationTable {
    pub fn new(entries: BTreeMap<String, String>) -> Result<Self> {
        for (key, expansion) in &entries {
            let len = key.chars().count();
            if !(2..=3).contains(&len) {
                return Err(Error::InvalidConfig(format!(
                    "abbreviation key {key:?} must have 2 or 3 characters"
                )));
            }
            if !key.chars().all(is_token_char) {
                return Err(Error::InvalidConfig(format!(
                    "abbreviation key {key:?} must be lowercase letters only"
                )));
            }
            let expanded = split_normalized(expansion);
            if expanded.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "abbreviation {key:?} has an empty expansion"
                )));
            }
            if let Some(cyclic) = expanded.iter().find(|t| entries.contains_key(*t)) {
                return Err(Error::InvalidConfig(format!(
                    "abbreviation {key:?} expands to another key {cyclic:?}"
                )));
            }
        }
        Ok(AbbreviationTable { entries })
    }

    pub fn empty() -> Self {
        AbbreviationTable {
            entries: BTreeMap::new(),
        }
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        let entries: BTreeMap<String, String> = serde_json::from_str(json)?;
        Self::new(entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&raw)
    }

    pub fn get(&self, token: &str) -> Option<&str> {
        self.entries.get(token).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Default for AbbreviationTable {
    fn default() -> Self {
        let entries = [
            ("dx", "destra"),
            ("sx", "sinistra"),
            ("sdr", "sindrome"),
            ("vrs", "virus respiratorio sinciziale"),
            ("ev", "endovena"),
            ("os", "orale"),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        AbbreviationTable::new(entries).expect("default abbreviation table is valid")
    }
}

impl<'de> Deserialize<'de> for AbbreviationTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let entries = BTreeMap::<String, String>::deserialize(d)?;
        AbbreviationTable::new(entries).map_err(serde::de::Error::custom)
    }
}

fn is_token_char(c: char) -> bool {
    c.is_ascii_lowercase() || (('\u{e0}'..='\u{ff}').contains(&c) && c != '\u{f7}')
}

fn split_normalized(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars().flat_map(char::to_lowercase) {
        if is_token_char(c) {
            current.push(c);
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Normalise a diagnosis string and expand abbreviations.
pub fn normalize(text: &str, abbr: &AbbreviationTable) -> TokenList {
    let mut out = Vec::new();
    for token in split_normalized(text) {
        match abbr.get(&token) {
            Some(expansion) => out.extend(split_normalized(expansion)),
            None => out.push(token),
        }
    }
    TokenList(out)
}

/// Normalise letter text without abbreviation expansion, keeping the first
/// `max_tokens` tokens.
pub fn tokenize_letter(text: &str, max_tokens: usize) -> TokenList {
    assert!(max_tokens >= 1, "max_tokens must be at least 1");
    let mut tokens = split_normalized(text);
    tokens.truncate(max_tokens);
    TokenList(tokens)
}

/// All tokens of `text`, untruncated.
pub fn tokenize_all(text: &str) -> TokenList {
    TokenList(split_normalized(text))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(list: &TokenList) -> Vec<&str> {
        list.iter().collect()
    }

    #[test]
    fn strips_punctuation_and_digits() {
        let out = normalize("Trauma cranico, 2° episodio!", &AbbreviationTable::empty());
        assert_eq!(toks(&out), ["trauma", "cranico", "episodio"]);
    }

    #[test]
    fn expands_abbreviation() {
        let out = normalize("trauma dx", &AbbreviationTable::default());
        assert_eq!(toks(&out), ["trauma", "destra"]);
    }

    #[test]
    fn drops_icd_code() {
        let out = normalize("519.11 broncospasmo acuto", &AbbreviationTable::default());
        assert_eq!(toks(&out), ["broncospasmo", "acuto"]);
    }

    #[test]
    fn multi_token_expansion_and_apostrophe() {
        let out = normalize("Bronchiolite da VRS, difficolta' alimentazione", &AbbreviationTable::default());
        assert_eq!(
            toks(&out),
            ["bronchiolite", "da", "virus", "respiratorio", "sinciziale", "difficolta", "alimentazione"]
        );
    }

    #[test]
    fn accents_preserved() {
        let out = normalize("Febbre ELEVATÀ però", &AbbreviationTable::empty());
        assert_eq!(toks(&out), ["febbre", "elevatà", "però"]);
    }

    #[test]
    fn empty_input() {
        assert!(normalize("", &AbbreviationTable::default()).is_empty());
        assert!(normalize(" .,;12 ", &AbbreviationTable::default()).is_empty());
    }

    #[test]
    fn truncation() {
        let text: Vec<String> = (0..600).map(|i| format!("parola{}x", i % 7)).collect();
        let out = tokenize_letter(&text.join(" "), 512);
        assert_eq!(out.len(), 512);
        let short = tokenize_letter("uno due tre quattro cinque sei sette otto nove dieci", 512);
        assert_eq!(short.len(), 10);
        assert!(tokenize_letter("", 512).is_empty());
    }

    #[test]
    fn letter_tokens_do_not_expand() {
        let out = tokenize_letter("trauma dx", 10);
        assert_eq!(toks(&out), ["trauma", "dx"]);
    }

    #[test]
    fn rejects_bad_tables() {
        let long: BTreeMap<_, _> = [("abcd".to_string(), "x".to_string())].into();
        assert!(AbbreviationTable::new(long).is_err());
        let cyclic: BTreeMap<_, _> = [
            ("dx".to_string(), "destra sx".to_string()),
            ("sx".to_string(), "sinistra".to_string()),
        ]
        .into();
        assert!(AbbreviationTable::new(cyclic).is_err());
        assert!(AbbreviationTable::from_json_str(r#"{"Dx": "destra"}"#).is_err());
        let ok = AbbreviationTable::from_json_str(r#"{"dx": "destra"}"#).unwrap();
        assert_eq!(ok.get("dx"), Some("destra"));
    }

    #[test]
    fn chunking() {
        let list = tokenize_all(&vec!["a"; 1030].join(" "));
        let sizes: Vec<usize> = list.chunks(512).iter().map(TokenList::len).collect();
        assert_eq!(sizes, [512, 512, 6]);
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(text in "\\PC{0,80}") {
            let abbr = AbbreviationTable::default();
            let once = normalize(&text, &abbr);
            let twice = normalize(&once.joined(), &abbr);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn tokens_are_letters_only(text in "\\PC{0,80}") {
            let out = normalize(&text, &AbbreviationTable::default());
            for t in out.iter() {
                prop_assert!(!t.is_empty());
                prop_assert!(t.chars().all(is_token_char), "bad token {:?}", t);
            }
        }

        #[test]
        fn truncation_bound(text in "[a-z ]{0,200}", max in 1usize..40) {
            prop_assert!(tokenize_letter(&text, max).len() <= max);
        }
    }
}
