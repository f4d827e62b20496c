//! Keyword-contrast cluster summaries and second-level merging.
//!
//! A token describes a cluster when it occurs in a large share of the
//! cluster's strings while being comparatively rare over all strings.
//! First-level clusters are then re-embedded through their keyword strings
//! and clustered again so that fragments of one diagnosis merge.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed::{embed_text, fit_pca, project_pca, EmbedderConfig, EmbeddingVector};
use crate::error::{Error, Result};
use crate::hdbscan::{cluster, HdbscanParams};
use crate::textnorm::{tokenize_all, TokenList};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KeywordParams {
    pub max_keywords: usize,
    /// Minimum share of cluster members containing the token.
    pub min_cluster_freq: f64,
    /// Minimum ratio of cluster share to corpus share.
    pub ratio_threshold: f64,
}

impl Default for KeywordParams {
    fn default() -> Self {
        KeywordParams {
            max_keywords: 6,
            min_cluster_freq: 0.30,
            ratio_threshold: 3.0,
        }
    }
}

impl KeywordParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_keywords == 0 {
            return Err(Error::InvalidConfig("max_keywords must be at least 1".into()));
        }
        if !(self.min_cluster_freq > 0.0 && self.ratio_threshold > 0.0) {
            return Err(Error::InvalidConfig("keyword thresholds must be positive".into()));
        }
        Ok(())
    }
}

/// Document frequencies over the unique diagnosis strings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorpusStats {
    pub n_docs: usize,
    pub doc_freq: HashMap<String, usize>,
}

impl CorpusStats {
    pub fn from_documents<'a>(docs: impl IntoIterator<Item = &'a TokenList>) -> Self {
        let mut stats = CorpusStats::default();
        for doc in docs {
            stats.n_docs += 1;
            let unique: BTreeSet<&str> = doc.iter().collect();
            for t in unique {
                *stats.doc_freq.entry(t.to_string()).or_default() += 1;
            }
        }
        stats
    }

    /// Share of documents containing `token`, floored at `1/N`.
    pub fn fraction(&self, token: &str) -> f64 {
        let n = self.n_docs.max(1) as f64;
        let df = self.doc_freq.get(token).copied().unwrap_or(0) as f64;
        (df / n).max(1.0 / n)
    }
}

/// Per-cluster token document counts, maintained incrementally.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClusterTokenCounts {
    n_members: usize,
    counts: BTreeMap<String, usize>,
}

impl ClusterTokenCounts {
    pub fn from_members<'a>(members: impl IntoIterator<Item = &'a TokenList>) -> Self {
        let mut counts = ClusterTokenCounts::default();
        for m in members {
            counts.add(m);
        }
        counts
    }

    pub fn add(&mut self, member: &TokenList) {
        self.n_members += 1;
        for t in member.iter().collect::<BTreeSet<_>>() {
            *self.counts.entry(t.to_string()).or_default() += 1;
        }
    }

    /// Remove a member previously added.
    pub fn remove(&mut self, member: &TokenList) {
        assert!(self.n_members > 0, "remove from an empty cluster");
        self.n_members -= 1;
        for t in member.iter().collect::<BTreeSet<_>>() {
            let c = self.counts.get_mut(t).expect("token of a member that was added");
            *c -= 1;
            if *c == 0 {
                self.counts.remove(t);
            }
        }
    }

    pub fn n_members(&self) -> usize {
        self.n_members
    }

    pub fn fraction(&self, token: &str) -> f64 {
        if self.n_members == 0 {
            return 0.0;
        }
        self.counts.get(token).copied().unwrap_or(0) as f64 / self.n_members as f64
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredKeyword {
    pub token: String,
    pub cluster_fraction: f64,
    pub score: f64,
}

/// Keywords passing both thresholds, best first (score descending, then
/// alphabetical), at most `max_keywords`.
pub fn score_keywords(counts: &ClusterTokenCounts, stats: &CorpusStats, params: &KeywordParams) -> Vec<ScoredKeyword> {
    let mut scored: Vec<ScoredKeyword> = counts
        .tokens()
        .filter_map(|t| {
            let cluster_fraction = counts.fraction(t);
            let score = cluster_fraction / stats.fraction(t);
            (cluster_fraction >= params.min_cluster_freq && score >= params.ratio_threshold).then(|| ScoredKeyword {
                token: t.to_string(),
                cluster_fraction,
                score,
            })
        })
        .collect();
    scored.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.token.cmp(&b.token)));
    scored.truncate(params.max_keywords);
    scored
}

/// Keyword list of a cluster, best first.
pub fn cluster_keywords(members: &[&TokenList], stats: &CorpusStats, params: &KeywordParams) -> Vec<String> {
    let counts = ClusterTokenCounts::from_members(members.iter().copied());
    score_keywords(&counts, stats, params).into_iter().map(|k| k.token).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub level: u8,
    pub cluster_id: usize,
    pub size: usize,
    /// Best first. A single `_cluster_N` placeholder when nothing passed.
    pub keywords: Vec<String>,
    /// Indices into the unique diagnosis-string table, ascending.
    pub member_string_ids: Vec<usize>,
    /// First-level clusters merged into this one (level 2 only).
    pub children: Vec<usize>,
    /// No token passed the keyword thresholds.
    pub flagged: bool,
}

impl ClusterSummary {
    /// Keywords sorted alphabetically, as displayed in reports.
    pub fn display_keywords(&self) -> Vec<String> {
        let mut k = self.keywords.clone();
        k.sort();
        k
    }

    /// Alphabetical space-joined keywords, the text re-embedded at level 2.
    pub fn keyword_string(&self) -> String {
        self.display_keywords().join(" ")
    }

    pub fn has_keyword(&self, token: &str) -> bool {
        !self.flagged && self.keywords.iter().any(|k| k == token)
    }
}

fn placeholder(level: u8, id: usize) -> Vec<String> {
    let prefix = if level == 1 { "_cluster_" } else { "_cluster2_" };
    vec![format!("{prefix}{id}")]
}

/// Summaries of the first-level clusters. `labels[i]` is the cluster of
/// unique string `i`, or negative for noise and excluded strings.
pub fn summarize_level1(
    strings: &[TokenList],
    labels: &[i64],
    n_clusters: usize,
    stats: &CorpusStats,
    params: &KeywordParams,
) -> Result<Vec<ClusterSummary>> {
    params.validate()?;
    if strings.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: strings.len(),
            right: labels.len(),
        });
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_clusters];
    for (i, &l) in labels.iter().enumerate() {
        if l >= 0 {
            members
                .get_mut(l as usize)
                .ok_or_else(|| Error::Parameter(format!("label {l} out of range for {n_clusters} clusters")))?
                .push(i);
        }
    }
    Ok(members
        .into_par_iter()
        .enumerate()
        .map(|(id, ids)| summary(1, id, ids, Vec::new(), strings, stats, params))
        .collect())
}

fn summary(
    level: u8,
    id: usize,
    ids: Vec<usize>,
    children: Vec<usize>,
    strings: &[TokenList],
    stats: &CorpusStats,
    params: &KeywordParams,
) -> ClusterSummary {
    let docs: Vec<&TokenList> = ids.iter().map(|&i| &strings[i]).collect();
    let keywords = cluster_keywords(&docs, stats, params);
    let flagged = keywords.is_empty();
    ClusterSummary {
        level,
        cluster_id: id,
        size: ids.len(),
        keywords: if flagged { placeholder(level, id) } else { keywords },
        member_string_ids: ids,
        children,
        flagged,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Level2Params {
    pub hdbscan: HdbscanParams,
    pub pca_dim: usize,
}

impl Default for Level2Params {
    fn default() -> Self {
        Level2Params {
            // A level-2 cluster spanning every keyword string would merge
            // unrelated diseases, so the root is never a cluster here. Core
            // distances exclude the point itself, so min_samples=1 lets two
            // close keyword strings form a pair without a third neighbour.
            hdbscan: HdbscanParams {
                allow_single_cluster: false,
                ..HdbscanParams::new(2, 1)
            },
            pca_dim: 16,
        }
    }
}

/// Merge first-level clusters whose keyword strings cluster together.
///
/// Flagged clusters and level-2 noise pass through as singletons. Level-2
/// clusters are numbered by their smallest child id.
pub fn second_level_merge(
    level1: &[ClusterSummary],
    strings: &[TokenList],
    stats: &CorpusStats,
    embedder: &EmbedderConfig,
    level2: &Level2Params,
    params: &KeywordParams,
) -> Result<Vec<ClusterSummary>> {
    params.validate()?;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let candidates: Vec<usize> = level1.iter().filter(|s| !s.flagged).map(|s| s.cluster_id).collect();
    let mut vectors: Vec<EmbeddingVector> = Vec::with_capacity(candidates.len());
    let mut embedded: Vec<usize> = Vec::with_capacity(candidates.len());
    for &c in &candidates {
        match embed_text(&tokenize_all(&level1[c].keyword_string()), embedder) {
            Ok(v) => {
                vectors.push(v);
                embedded.push(c);
            }
            Err(Error::Degenerate) => groups.push(vec![c]),
            Err(e) => return Err(e),
        }
    }
    if embedded.len() >= 2 {
        let k = level2.pca_dim.min(embedded.len() - 1).min(embedder.dim);
        let pca = fit_pca(&vectors, k)?;
        let reduced = vectors.iter().map(|v| project_pca(&pca, v)).collect::<Result<Vec<_>>>()?;
        let mut hp = level2.hdbscan.clone();
        hp.min_samples = Some(hp.min_samples().min(embedded.len() - 1).max(1));
        let assignment = cluster(&reduced, &hp)?;
        let mut merged: Vec<Vec<usize>> = vec![Vec::new(); assignment.n_clusters];
        for (pos, &label) in assignment.labels.iter().enumerate() {
            if label >= 0 {
                merged[label as usize].push(embedded[pos]);
            } else {
                groups.push(vec![embedded[pos]]);
            }
        }
        groups.extend(merged);
    } else {
        groups.extend(embedded.iter().map(|&c| vec![c]));
    }
    groups.extend(level1.iter().filter(|s| s.flagged).map(|s| vec![s.cluster_id]));
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort_by_key(|g| g[0]);

    let out = groups
        .into_par_iter()
        .enumerate()
        .map(|(id, children)| {
            let mut ids: Vec<usize> = children.iter().flat_map(|&c| level1[c].member_string_ids.iter().copied()).collect();
            ids.sort_unstable();
            if children.len() == 1 {
                // A pass-through keeps its first-level description.
                let s = &level1[children[0]];
                return ClusterSummary {
                    level: 2,
                    cluster_id: id,
                    size: s.size,
                    keywords: s.keywords.clone(),
                    member_string_ids: ids,
                    children,
                    flagged: s.flagged,
                };
            }
            summary(2, id, ids, children, strings, stats, params)
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textnorm::{normalize, AbbreviationTable};
    use proptest::prelude::*;

    fn tl(s: &str) -> TokenList {
        normalize(s, &AbbreviationTable::empty())
    }

    fn background(n: usize) -> Vec<TokenList> {
        (0..n).map(|i| tl(&format!("paziente caso{} varie{}", i, i % 7))).collect()
    }

    #[test]
    fn bronchiolite_lieve() {
        let mut corpus = background(100);
        let cluster: Vec<TokenList> = (0..10)
            .map(|i| tl(if i % 2 == 0 { "bronchiolite lieve" } else { "bronchiolite" }))
            .collect();
        corpus.extend(cluster.iter().cloned());
        let stats = CorpusStats::from_documents(&corpus);
        let members: Vec<&TokenList> = cluster.iter().collect();
        let kw = cluster_keywords(&members, &stats, &KeywordParams::default());
        assert_eq!(kw, ["bronchiolite", "lieve"]);
    }

    #[test]
    fn corpus_common_token_excluded() {
        let corpus = background(100);
        let stats = CorpusStats::from_documents(&corpus);
        let cluster = [tl("paziente febbre"), tl("paziente febbre alta")];
        let members: Vec<&TokenList> = cluster.iter().collect();
        let kw = cluster_keywords(&members, &stats, &KeywordParams::default());
        assert!(!kw.contains(&"paziente".to_string()));
        assert!(kw.contains(&"febbre".to_string()));
    }

    #[test]
    fn single_member_cluster() {
        let mut corpus = background(50);
        corpus.push(tl("otite media acuta"));
        let stats = CorpusStats::from_documents(&corpus);
        let members = [&corpus[50]];
        let kw = cluster_keywords(&members, &stats, &KeywordParams::default());
        let mut sorted = kw.clone();
        sorted.sort();
        assert_eq!(sorted, ["acuta", "media", "otite"]);
    }

    #[test]
    fn max_keywords_keeps_best() {
        let stats = CorpusStats::from_documents(&background(100));
        let doc = tl("a b c d e f g h");
        let kw = cluster_keywords(&[&doc], &stats, &KeywordParams { max_keywords: 3, ..KeywordParams::default() });
        assert_eq!(kw, ["a", "b", "c"]);
    }

    fn level1_fixture() -> (Vec<TokenList>, Vec<i64>) {
        let mut strings = Vec::new();
        let mut labels = Vec::new();
        let groups: [&[&str]; 5] = [
            &["bronchiolite lieve", "bronchiolite lieve", "lieve bronchiolite"],
            &["bronchiolite acuta iniziale lieve", "acuta bronchiolite lieve iniziale"],
            &["trauma cranico minore", "trauma cranico", "cranico trauma lieve"],
            &["gastroenterite acuta", "gastroenterite acuta disidratazione"],
            &["otite media", "otite media acuta"],
        ];
        for (c, g) in groups.iter().enumerate() {
            for s in g.iter() {
                strings.push(tl(s));
                labels.push(c as i64);
            }
        }
        for i in 0..30 {
            strings.push(tl(&format!("varie{i} altro{i}")));
            labels.push(-1);
        }
        (strings, labels)
    }

    #[test]
    fn merge_preserves_union_and_children() {
        let (strings, labels) = level1_fixture();
        let stats = CorpusStats::from_documents(&strings);
        let params = KeywordParams::default();
        let l1 = summarize_level1(&strings, &labels, 5, &stats, &params).unwrap();
        let l2 = second_level_merge(&l1, &strings, &stats, &EmbedderConfig::default(), &Level2Params::default(), &params).unwrap();
        assert!(l2.len() <= l1.len());
        let u1: BTreeSet<usize> = l1.iter().flat_map(|s| s.member_string_ids.clone()).collect();
        let u2: BTreeSet<usize> = l2.iter().flat_map(|s| s.member_string_ids.clone()).collect();
        assert_eq!(u1, u2);
        let mut children: Vec<usize> = l2.iter().flat_map(|s| s.children.clone()).collect();
        children.sort();
        assert_eq!(children, [0, 1, 2, 3, 4]);
        for s in &l2 {
            let child_sizes: usize = s.children.iter().map(|&c| l1[c].size).sum();
            assert_eq!(s.size, child_sizes);
        }
    }

    #[test]
    fn fragments_of_one_disease_merge() {
        let groups: [&[&str]; 14] = [
            &["bronchiolite lieve", "lieve bronchiolite", "bronchiolite lieve"],
            &["acuta bronchiolite iniziale lieve", "bronchiolite acuta lieve", "bronchiolite iniziale lieve"],
            &["broncospasmo acuto", "acuto broncospasmo"],
            &["broncospasmo in corso", "broncospasmo corso"],
            &["broncospasmo episodio", "episodio broncospasmo"],
            &["broncospasmo otite", "otite broncospasmo"],
            &["broncospasmo parainfettivo", "parainfettivo broncospasmo"],
            &["broncospasmo virosi", "virosi broncospasmo"],
            &["broncospasmo polmonite", "polmonite broncospasmo"],
            &["broncospasmo flogosi vie", "flogosi vie broncospasmo"],
            &["trauma cranico minore", "trauma cranico"],
            &["gastroenterite disidratazione", "gastroenterite"],
            &["contusione ginocchio", "contusione polso"],
            &["orticaria allergica", "orticaria"],
        ];
        let mut strings = Vec::new();
        let mut labels = Vec::new();
        for (c, g) in groups.iter().enumerate() {
            for s in g.iter() {
                strings.push(tl(s));
                labels.push(c as i64);
            }
        }
        let mut docs = strings.clone();
        docs.extend(background(200));
        let stats = CorpusStats::from_documents(&docs);
        let params = KeywordParams::default();
        let l1 = summarize_level1(&strings, &labels, groups.len(), &stats, &params).unwrap();
        let l2 = second_level_merge(&l1, &strings, &stats, &EmbedderConfig::default(), &Level2Params::default(), &params).unwrap();
        let parent = |c: usize| l2.iter().position(|s| s.children.contains(&c)).unwrap();
        assert_eq!(parent(0), parent(1));
        assert!((3..10).all(|c| parent(c) == parent(2)));
        assert_ne!(parent(0), parent(2));
        assert!(l2.len() < l1.len());
    }

    #[test]
    fn flagged_cluster_passes_through() {
        let strings = vec![tl("paziente"), tl("paziente"), tl("febbre alta"), tl("febbre"), tl("otite")];
        let labels = vec![0, 0, 1, 1, -1];
        // "paziente" is in 40% of documents: score 2.5 < 3.
        let stats = CorpusStats::from_documents(&strings);
        let params = KeywordParams::default();
        let l1 = summarize_level1(&strings, &labels, 2, &stats, &params).unwrap();
        assert!(l1[0].flagged);
        assert_eq!(l1[0].keywords, ["_cluster_0"]);
        let l2 = second_level_merge(&l1, &strings, &stats, &EmbedderConfig::default(), &Level2Params::default(), &params).unwrap();
        assert!(l2.iter().any(|s| s.flagged && s.children == [0]));
    }

    proptest! {
        #[test]
        fn incremental_counts_match_recompute(
            docs in proptest::collection::vec("[abcde]( [abcde]){0,4}", 1..20),
            removals in proptest::collection::vec(any::<prop::sample::Index>(), 0..10),
        ) {
            let lists: Vec<TokenList> = docs.iter().map(|d| tl(d)).collect();
            let mut live: Vec<usize> = (0..lists.len()).collect();
            let mut counts = ClusterTokenCounts::from_members(&lists);
            for r in removals {
                if live.is_empty() { break; }
                let pos = r.index(live.len());
                counts.remove(&lists[live.remove(pos)]);
                let fresh = ClusterTokenCounts::from_members(live.iter().map(|&i| &lists[i]));
                prop_assert_eq!(&counts, &fresh);
            }
        }

        #[test]
        fn keywords_respect_thresholds(docs in proptest::collection::vec("[a-f]( [a-f]){0,4}", 1..12)) {
            let lists: Vec<TokenList> = docs.iter().map(|d| tl(d)).collect();
            let mut corpus = background(40);
            corpus.extend(lists.iter().cloned());
            let stats = CorpusStats::from_documents(&corpus);
            let params = KeywordParams::default();
            let counts = ClusterTokenCounts::from_members(&lists);
            let kw = score_keywords(&counts, &stats, &params);
            prop_assert!(kw.len() <= params.max_keywords);
            for k in &kw {
                prop_assert!(k.cluster_fraction >= params.min_cluster_freq && k.score >= params.ratio_threshold);
            }
            for w in kw.windows(2) {
                prop_assert!(w[0].score >= w[1].score);
            }
        }
    }
}
