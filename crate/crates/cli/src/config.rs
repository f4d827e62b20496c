//! Pipeline configuration: one JSON document naming every input and stage
//! parameter.
//!
//! Rules, abbreviations and definitions may be given as a path or inline.
//! [`PipelineConfig::load`] reads referenced files and stores their content
//! inline, so the resolved config alone reproduces a run.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use diagweak_core::embed::EmbedderProvider;
use diagweak_core::weaklabel::default_definitions;
use diagweak_core::{
    AbbreviationTable, DiseaseDefinition, EmbedderConfig, ExtractionRules, HdbscanParams, InputVariant, KeywordParams,
    LabelSource, Level2Params, SynthesisConfig, TrainConfig,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Value given inline or as a path to a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    Path(PathBuf),
    Inline(T),
}

impl<T: DeserializeOwned + Clone> Source<T> {
    fn resolve(&self, base: &Path, what: &str) -> Result<T> {
        match self {
            Source::Inline(v) => Ok(v.clone()),
            Source::Path(p) => {
                let path = base.join(p);
                let raw = std::fs::read_to_string(&path).with_context(|| format!("reading {what} {}", path.display()))?;
                serde_json::from_str(&raw).with_context(|| format!("parsing {what} {}", path.display()))
            }
        }
    }

    pub fn inline(&self) -> Option<&T> {
        match self {
            Source::Inline(v) => Some(v),
            Source::Path(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusSource {
    Synthetic(SynthesisConfig),
    /// JSONL letters, resolved relative to the config file.
    Path(PathBuf),
}

impl Default for CorpusSource {
    fn default() -> Self {
        CorpusSource::Synthetic(SynthesisConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalSettings {
    pub k: usize,
    pub logo_min_positives: usize,
    /// Token searched by the rule-based baselines.
    pub rule_term: String,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            k: 10,
            logo_min_positives: 15,
            rule_term: "bronchiolite".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub output_dir: PathBuf,
    pub seed: u64,
    pub corpus: CorpusSource,
    pub rules: Source<ExtractionRules>,
    pub abbreviations: Source<AbbreviationTable>,
    pub definitions: Source<Vec<DiseaseDefinition>>,
    /// JSONL `{id, vector}` keyed by normalised diagnosis string; used when
    /// `embedder.provider` is `external_file`.
    pub external_embeddings: Option<PathBuf>,
    pub embedder: EmbedderConfig,
    pub pca_dim: usize,
    pub hdbscan: HdbscanParams,
    pub keywords: KeywordParams,
    pub level2: Level2Params,
    /// Cluster level whose selection yields the weak labels.
    pub selection_level: u8,
    /// `seed` is replaced by the train and evaluate stage seeds.
    pub train: TrainConfig,
    /// Labels the `train` stage fits on.
    pub labels: LabelSource,
    pub variant: InputVariant,
    pub eval: EvalSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            output_dir: PathBuf::from("out"),
            seed: 1,
            corpus: CorpusSource::default(),
            rules: Source::Inline(ExtractionRules::default()),
            abbreviations: Source::Inline(AbbreviationTable::default()),
            definitions: Source::Inline(default_definitions()),
            external_embeddings: None,
            embedder: EmbedderConfig::default(),
            pca_dim: 16,
            hdbscan: HdbscanParams::default(),
            keywords: KeywordParams::default(),
            level2: Level2Params::default(),
            selection_level: 1,
            train: TrainConfig::default(),
            labels: LabelSource::Weak,
            variant: InputVariant::WithDiagnosis,
            eval: EvalSettings::default(),
        }
    }
}

impl PipelineConfig {
    /// Read a config file, resolve its paths against the file's directory
    /// and inline referenced rule, abbreviation and definition files.
    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: PipelineConfig =
            serde_json::from_str(&raw).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        cfg.resolved(base)
    }

    /// Absolute paths and inline sources, relative to `base`.
    pub fn resolved(mut self, base: &Path) -> Result<Self> {
        let base = std::path::absolute(base).context("resolving config directory")?;
        self.output_dir = base.join(&self.output_dir);
        if let CorpusSource::Path(p) = &mut self.corpus {
            *p = base.join(&*p);
        }
        if let Some(p) = &mut self.external_embeddings {
            *p = base.join(&*p);
        }
        self.rules = Source::Inline(self.rules.resolve(&base, "extraction rules")?);
        self.abbreviations = Source::Inline(self.abbreviations.resolve(&base, "abbreviations")?);
        self.definitions = Source::Inline(self.definitions.resolve(&base, "disease definitions")?);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.corpus {
            CorpusSource::Synthetic(s) => s.validate()?,
            CorpusSource::Path(p) => {
                if !p.is_file() {
                    bail!("corpus file {} does not exist", p.display());
                }
            }
        }
        self.rules().compile()?;
        self.embedder.validate()?;
        match (self.embedder.provider, &self.external_embeddings) {
            (EmbedderProvider::ExternalFile, None) => {
                bail!("embedder provider external_file needs external_embeddings")
            }
            (EmbedderProvider::ExternalFile, Some(p)) if !p.is_file() => {
                bail!("external embeddings file {} does not exist", p.display())
            }
            _ => {}
        }
        if self.pca_dim == 0 {
            bail!("pca_dim must be at least 1");
        }
        self.hdbscan.validate()?;
        self.level2.hdbscan.validate()?;
        self.keywords.validate()?;
        self.train.validate()?;
        if self.definitions().is_empty() {
            bail!("at least one disease definition is required");
        }
        if !matches!(self.selection_level, 1 | 2) {
            bail!("selection_level must be 1 or 2");
        }
        if self.eval.k < 2 {
            bail!("eval.k must be at least 2");
        }
        Ok(())
    }

    pub fn rules(&self) -> &ExtractionRules {
        self.rules.inline().expect("config resolved")
    }

    pub fn abbreviations(&self) -> &AbbreviationTable {
        self.abbreviations.inline().expect("config resolved")
    }

    pub fn definitions(&self) -> &[DiseaseDefinition] {
        self.definitions.inline().expect("config resolved")
    }

    /// The config as stored in the manifest: everything but the output
    /// directory, which does not affect any result.
    pub fn snapshot(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serialises");
        v.as_object_mut().expect("object").remove("output_dir");
        v
    }
}
