//! Document vectors and dimensionality reduction.
//!
//! The built-in embedder hashes word unigrams and character n-grams into a
//! fixed number of signed buckets and L2-normalises the sum. Vectors computed
//! elsewhere can be loaded from a JSONL file instead.

mod external;
mod pca;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textnorm::TokenList;

pub use external::{load_external_embeddings, parse_external_embeddings};
pub use pca::{fit_pca, project_pca, PcaModel};

/// A dense, finite real vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Parameter("embedding vectors must have dim >= 1".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("non-finite embedding value at position {i}")));
        }
        Ok(EmbeddingVector { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &EmbeddingVector) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }

    /// Scale to unit length. Fails on the zero vector.
    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::Degenerate);
        }
        self.values.iter_mut().for_each(|v| *v /= norm);
        Ok(self)
    }
}

impl TryFrom<Vec<f64>> for EmbeddingVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        EmbeddingVector::new(values)
    }
}

impl From<EmbeddingVector> for Vec<f64> {
    fn from(v: EmbeddingVector) -> Self {
        v.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbedderProvider {
    HashedNgram,
    ExternalFile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbedderConfig {
    pub provider: EmbedderProvider,
    pub dim: usize,
    pub char_ngram_range: (usize, usize),
    pub hash_seed: u64,
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        EmbedderConfig {
            provider: EmbedderProvider::HashedNgram,
            dim: 768,
            char_ngram_range: (3, 5),
            hash_seed: 0x5eed_d1a9,
        }
    }
}

impl EmbedderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 8 {
            return Err(Error::InvalidConfig(format!("embedding dim {} must be at least 8", self.dim)));
        }
        let (lo, hi) = self.char_ngram_range;
        if lo == 0 || lo > hi {
            return Err(Error::InvalidConfig(format!("invalid char n-gram range ({lo}, {hi})")));
        }
        Ok(())
    }

    /// Identifies the feature space; a classifier trained on one embedder
    /// refuses vectors from another.
    pub fn fingerprint(&self) -> String {
        let provider = match self.provider {
            EmbedderProvider::HashedNgram => "hashed_ngram",
            EmbedderProvider::ExternalFile => "external_file",
        };
        format!(
            "{provider}/dim={}/ngram={}-{}/seed={}",
            self.dim, self.char_ngram_range.0, self.char_ngram_range.1, self.hash_seed
        )
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Seeded FNV-1a over a feature kind tag and the feature bytes, followed by
/// a splitmix finaliser so that low bits are well mixed.
fn feature_hash(seed: u64, kind: u8, bytes: impl IntoIterator<Item = u8>) -> u64 {
    let mut h = FNV_OFFSET ^ seed.wrapping_mul(FNV_PRIME);
    for b in std::iter::once(kind).chain(bytes) {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h ^= h >> 30;
    h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h ^= h >> 27;
    h = h.wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

fn add_feature(acc: &mut [f64], h: u64) {
    let bucket = (h % acc.len() as u64) as usize;
    let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
    acc[bucket] += sign;
}

/// Accumulate the raw (unnormalised) hashed features of `tokens`.
pub fn hashed_features(tokens: &TokenList, cfg: &EmbedderConfig) -> Vec<f64> {
    let mut acc = vec![0.0; cfg.dim];
    let (lo, hi) = cfg.char_ngram_range;
    let mut padded: Vec<char> = Vec::new();
    let mut buf = [0u8; 4];
    for token in tokens.iter() {
        add_feature(&mut acc, feature_hash(cfg.hash_seed, b'w', token.bytes()));
        padded.clear();
        padded.push('<');
        padded.extend(token.chars());
        padded.push('>');
        for n in lo..=hi.min(padded.len()) {
            for window in padded.windows(n) {
                let bytes = window.iter().flat_map(|c| c.encode_utf8(&mut buf).as_bytes().to_vec());
                add_feature(&mut acc, feature_hash(cfg.hash_seed, b'c', bytes));
            }
        }
    }
    acc
}

/// Embed a token list with the hashed n-gram provider. An empty token list
/// (or one whose features cancel out) is [`Error::Degenerate`].
pub fn embed_text(tokens: &TokenList, cfg: &EmbedderConfig) -> Result<EmbeddingVector> {
    if cfg.provider != EmbedderProvider::HashedNgram {
        return Err(Error::InvalidConfig("embed_text requires the hashed_ngram provider".into()));
    }
    cfg.validate()?;
    if tokens.is_empty() {
        return Err(Error::Degenerate);
    }
    EmbeddingVector { values: hashed_features(tokens, cfg) }.normalized()
}

/// Cosine similarity of two vectors of equal dimension.
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> f64 {
    let denom = a.norm() * b.norm();
    if denom == 0.0 {
        0.0
    } else {
        a.dot(b) / denom
    }
}
