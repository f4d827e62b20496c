//! Keyword definitions selecting clusters, and per-letter weak labels.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::keywords::ClusterSummary;
use crate::textnorm::{normalize, AbbreviationTable};

/// A cluster matches when all positive and none of the negative keywords
/// are among its keywords (exact token equality).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiseaseDefinition {
    pub disease: String,
    pub positive: BTreeSet<String>,
    #[serde(default)]
    pub negative: BTreeSet<String>,
}

impl DiseaseDefinition {
    pub fn new<P, N>(disease: impl Into<String>, positive: P, negative: N) -> Result<Self>
    where
        P: IntoIterator,
        P::Item: Into<String>,
        N: IntoIterator,
        N::Item: Into<String>,
    {
        let def = DiseaseDefinition {
            disease: disease.into(),
            positive: positive.into_iter().map(Into::into).collect(),
            negative: negative.into_iter().map(Into::into).collect(),
        };
        def.validate()?;
        Ok(def)
    }

    fn validate(&self) -> Result<()> {
        if self.positive.is_empty() {
            return Err(Error::InvalidConfig(format!("definition {:?} has no positive keywords", self.disease)));
        }
        if let Some(both) = self.positive.intersection(&self.negative).next() {
            return Err(Error::InvalidConfig(format!(
                "definition {:?}: {both:?} is both positive and negative",
                self.disease
            )));
        }
        for t in self.positive.iter().chain(&self.negative) {
            let norm = normalize(t, &AbbreviationTable::empty());
            if norm.len() != 1 || norm.tokens()[0] != *t {
                return Err(Error::InvalidConfig(format!(
                    "definition {:?}: keyword {t:?} is not a single normalised token",
                    self.disease
                )));
            }
        }
        Ok(())
    }

    pub fn matches(&self, summary: &ClusterSummary) -> bool {
        self.positive.iter().all(|t| summary.has_keyword(t)) && !self.negative.iter().any(|t| summary.has_keyword(t))
    }

    /// Compact rendering such as `broncospasmo+febbre` or `bronchiolite-sospetta`.
    pub fn describe(&self) -> String {
        let mut s = self.positive.iter().cloned().collect::<Vec<_>>().join("+");
        for n in &self.negative {
            s.push('-');
            s.push_str(n);
        }
        s
    }

    /// `[{disease, positive: [...], negative: [...]}]`
    pub fn load_all(path: &Path) -> Result<Vec<Self>> {
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&raw)?)
    }
}

impl<'de> Deserialize<'de> for DiseaseDefinition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            disease: String,
            positive: BTreeSet<String>,
            #[serde(default)]
            negative: BTreeSet<String>,
        }
        let raw = Raw::deserialize(d)?;
        DiseaseDefinition::new(raw.disease, raw.positive, raw.negative).map_err(serde::de::Error::custom)
    }
}

/// The definitions shipped for the bronchiolitis case study.
pub fn default_definitions() -> Vec<DiseaseDefinition> {
    vec![
        DiseaseDefinition::new("bronchiolite", ["bronchiolite"], Vec::<String>::new()).expect("valid"),
        DiseaseDefinition::new("bronchiolite", ["broncospasmo", "febbre"], Vec::<String>::new()).expect("valid"),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub level: u8,
    /// Selected cluster ids, ascending.
    pub selected: Vec<usize>,
    /// Description of the first definition that fired, per selected cluster.
    pub fired: BTreeMap<usize, String>,
}

impl Selection {
    pub fn is_selected(&self, cluster_id: usize) -> bool {
        self.selected.binary_search(&cluster_id).is_ok()
    }
}

/// Clusters matching at least one definition.
pub fn select_clusters(summaries: &[ClusterSummary], defs: &[DiseaseDefinition]) -> Result<Selection> {
    let level = summaries.first().map_or(1, |s| s.level);
    if summaries.iter().any(|s| s.level != level) {
        return Err(Error::Parameter("cluster summaries mix levels".into()));
    }
    let mut selected = Vec::new();
    let mut fired = BTreeMap::new();
    for s in summaries {
        if let Some(def) = defs.iter().find(|d| d.matches(s)) {
            selected.push(s.cluster_id);
            fired.insert(s.cluster_id, def.describe());
        }
    }
    selected.sort_unstable();
    if selected.is_empty() {
        log::warn!("no cluster matched the disease definitions");
    }
    Ok(Selection { level, selected, fired })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeakLabel {
    pub letter_id: String,
    pub label: bool,
    /// Cluster of the letter's diagnosis string at the selection level.
    pub cluster_id: Option<usize>,
    pub fired_definition: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakLabelSet {
    /// One entry per corpus letter, in corpus order.
    pub labels: Vec<WeakLabel>,
    pub level: u8,
    pub selected_clusters: Vec<usize>,
    pub definitions_used: Vec<DiseaseDefinition>,
}

impl WeakLabelSet {
    pub fn get(&self, letter_id: &str) -> Option<bool> {
        self.labels.iter().find(|l| l.letter_id == letter_id).map(|l| l.label)
    }

    pub fn as_bools(&self) -> Vec<bool> {
        self.labels.iter().map(|l| l.label).collect()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|l| l.label).count()
    }
}

/// Label each letter by whether its diagnosis string lies in a selected
/// cluster. `letter_cluster` maps letter id to the cluster of its string at
/// the selection level; letters without a string, with a degenerate string
/// or with a noise string are simply absent.
pub fn assign_weak_labels(
    corpus: &Corpus,
    letter_cluster: &BTreeMap<String, usize>,
    selection: &Selection,
    defs: &[DiseaseDefinition],
) -> WeakLabelSet {
    let labels = corpus
        .iter()
        .map(|letter| {
            let cluster_id = letter_cluster.get(&letter.id).copied();
            let fired = cluster_id.and_then(|c| selection.fired.get(&c).cloned());
            WeakLabel {
                letter_id: letter.id.clone(),
                label: fired.is_some(),
                cluster_id,
                fired_definition: fired,
            }
        })
        .collect();
    WeakLabelSet {
        labels,
        level: selection.level,
        selected_clusters: selection.selected.clone(),
        definitions_used: defs.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Letter, Provenance};

    fn summary(id: usize, keywords: &str) -> ClusterSummary {
        ClusterSummary {
            level: 2,
            cluster_id: id,
            size: 1,
            keywords: keywords.split(' ').map(String::from).collect(),
            member_string_ids: vec![id],
            children: vec![id],
            flagged: false,
        }
    }

    #[test]
    fn table_examples() {
        let defs = default_definitions();
        let s = [summary(0, "acuto broncospasmo corso febbre paziente"), summary(1, "broncospasmo otite")];
        let sel = select_clusters(&s, &defs).unwrap();
        assert_eq!(sel.selected, [0]);
        assert_eq!(sel.fired[&0], "broncospasmo+febbre");
    }

    #[test]
    fn negative_keyword_blocks() {
        let def = DiseaseDefinition::new("b", ["bronchiolite"], ["sospetta"]).unwrap();
        let sel = select_clusters(&[summary(0, "bronchiolite sospetta")], &[def]).unwrap();
        assert!(sel.selected.is_empty());
    }

    #[test]
    fn exact_token_matching() {
        let def = DiseaseDefinition::new("b", ["broncospasmo"], Vec::<String>::new()).unwrap();
        let sel = select_clusters(&[summary(0, "broncopolmonite")], &[def]).unwrap();
        assert!(sel.selected.is_empty());
    }

    #[test]
    fn placeholder_keywords_never_match() {
        let mut s = summary(0, "_cluster_0");
        s.flagged = true;
        let def = DiseaseDefinition::new("b", ["cluster"], Vec::<String>::new()).unwrap();
        assert!(select_clusters(&[s], &[def]).unwrap().selected.is_empty());
    }

    #[test]
    fn definition_validation() {
        assert!(DiseaseDefinition::new("x", Vec::<String>::new(), Vec::<String>::new()).is_err());
        assert!(DiseaseDefinition::new("x", ["a"], ["a"]).is_err());
        assert!(DiseaseDefinition::new("x", ["Febbre"], Vec::<String>::new()).is_err());
        assert!(DiseaseDefinition::new("x", ["due parole"], Vec::<String>::new()).is_err());
        let parsed: Vec<DiseaseDefinition> =
            serde_json::from_str(r#"[{"disease":"b","positive":["bronchiolite"]}]"#).unwrap();
        assert!(parsed[0].negative.is_empty());
        assert!(serde_json::from_str::<Vec<DiseaseDefinition>>(r#"[{"disease":"b","positive":[]}]"#).is_err());
    }

    #[test]
    fn monotone_in_definitions() {
        let s: Vec<ClusterSummary> = ["bronchiolite lieve", "broncospasmo febbre", "febbre", "otite"]
            .iter()
            .enumerate()
            .map(|(i, k)| summary(i, k))
            .collect();
        let defs = default_definitions();
        let one = select_clusters(&s, &defs[..1]).unwrap();
        let both = select_clusters(&s, &defs).unwrap();
        assert!(one.selected.iter().all(|c| both.selected.contains(c)));
        assert_eq!(both.selected, [0, 1]);
    }

    #[test]
    fn labels_follow_clusters() {
        let letters = ["A", "B", "C", "D"]
            .iter()
            .map(|id| Letter::new(*id, "H", "L", None, "x", None).unwrap())
            .collect();
        let corpus = Corpus::new(letters, Provenance::Ingested, None).unwrap();
        let selection = Selection {
            level: 2,
            selected: vec![3],
            fired: [(3, "bronchiolite".to_string())].into(),
        };
        // B has no string, C is noise, D is in an unselected cluster.
        let map: BTreeMap<String, usize> = [("A".to_string(), 3), ("D".to_string(), 1)].into();
        let set = assign_weak_labels(&corpus, &map, &selection, &default_definitions());
        assert_eq!(set.as_bools(), [true, false, false, false]);
        assert_eq!(set.labels[3].cluster_id, Some(1));
        assert_eq!(set.labels[0].fired_definition.as_deref(), Some("bronchiolite"));
        assert_eq!(set.positives(), 1);
    }
}
