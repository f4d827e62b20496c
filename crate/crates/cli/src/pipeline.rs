//! Stage runner. Each stage reads the artifacts of earlier stages from the
//! output directory, writes its own, and records checksums in the manifest.
//! A stage whose parameters and inputs are unchanged is skipped.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use diagweak_core::classify::{corpus_features, rule_classify, train_on_corpus, RuleScope};
use diagweak_core::corpus::generate_synthetic;
use diagweak_core::embed::{embed_text, fit_pca, load_external_embeddings, project_pca, EmbedderProvider};
use diagweak_core::eval::{
    cluster_sensitivity, evaluate_rule, fold_plan, run_cv, run_logo, run_subgroup, EvalData, GroupBy,
};
use diagweak_core::extraction::extract_all;
use diagweak_core::hdbscan::cluster_with_tree;
use diagweak_core::keywords::{second_level_merge, summarize_level1, CorpusStats};
use diagweak_core::textnorm::{normalize, tokenize_all};
use diagweak_core::weaklabel::{assign_weak_labels, select_clusters, Selection};
use diagweak_core::{ClusterSummary, Corpus, EmbeddingVector, InputVariant, LabelSource, TokenList};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::artifacts::*;
use crate::config::{CorpusSource, PipelineConfig};
use crate::manifest::{read_json, sha256_file, sha256_hex, write_json, Artifact, RunManifest, StageRecord, StageStatus, TIMINGS_FILE};
use crate::report::{row_name, EvaluationReport, LogoOutcome, SensitivityDocument};

pub const CONFIG_FILE: &str = "config.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Stage {
    Synth,
    Extract,
    Embed,
    Cluster,
    Keywords,
    Label,
    Train,
    Evaluate,
    Sensitivity,
}

impl Stage {
    pub const ALL: [Stage; 9] = [
        Stage::Synth,
        Stage::Extract,
        Stage::Embed,
        Stage::Cluster,
        Stage::Keywords,
        Stage::Label,
        Stage::Train,
        Stage::Evaluate,
        Stage::Sensitivity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Synth => "synth",
            Stage::Extract => "extract",
            Stage::Embed => "embed",
            Stage::Cluster => "cluster",
            Stage::Keywords => "keywords",
            Stage::Label => "label",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Sensitivity => "sensitivity",
        }
    }

    pub fn inputs(self) -> &'static [&'static str] {
        match self {
            Stage::Synth => &[],
            Stage::Extract => &["corpus.jsonl"],
            Stage::Embed => &["extraction.csv"],
            Stage::Cluster => &["reduced.json"],
            Stage::Keywords => &["corpus.jsonl", "strings.csv", "assignment.csv", "cluster.json"],
            Stage::Label => &["corpus.jsonl", "letter_strings.csv", "clusters.json"],
            Stage::Train | Stage::Evaluate => &["corpus.jsonl", "extraction.csv", "weak_labels.csv"],
            Stage::Sensitivity => &[
                "corpus.jsonl",
                "extraction.csv",
                "letter_strings.csv",
                "assignment.csv",
                "clusters.json",
                "selection.json",
            ],
        }
    }

    pub fn outputs(self) -> &'static [&'static str] {
        match self {
            Stage::Synth => &["corpus.jsonl"],
            Stage::Extract => &["extraction.csv", "extraction.json"],
            Stage::Embed => &["strings.csv", "letter_strings.csv", "pca.json", "reduced.json"],
            Stage::Cluster => &["assignment.csv", "condensed_tree.csv", "cluster.json"],
            Stage::Keywords => &["clusters.json", "clusters.csv"],
            Stage::Label => &["weak_labels.csv", "selection.json"],
            Stage::Train => &["model.json"],
            Stage::Evaluate => &["report.json", "report.txt", "folds.csv"],
            Stage::Sensitivity => &["sensitivity.json", "sensitivity.txt"],
        }
    }

    /// The stage that writes `artifact`.
    pub fn producing(artifact: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|s| s.outputs().contains(&artifact))
    }
}

/// Seed of one stage, derived from the global seed and the stage name.
pub fn stage_seed(seed: u64, stage: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(stage.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionSummary {
    pub n_letters: usize,
    pub with_diagnosis: usize,
    pub coverage: f64,
    pub unique_trimmed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reduced {
    pub dim: usize,
    pub explained_ratio: f64,
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummaryFile {
    pub n_strings: usize,
    pub n_clusters: usize,
    pub noise: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterLevels {
    pub level1: Vec<ClusterSummary>,
    pub level2: Vec<ClusterSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionFile {
    pub selection: Selection,
    /// First-level clusters covered by the selection.
    pub level1_clusters: Vec<usize>,
    pub n_letters: usize,
    pub positives: usize,
}

pub struct Pipeline {
    cfg: PipelineConfig,
    dir: PathBuf,
    manifest: RunManifest,
    timings: BTreeMap<String, f64>,
}

impl Pipeline {
    /// Validate the config, prepare the output directory and open its
    /// manifest.
    pub fn new(cfg: PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        let dir = cfg.output_dir.clone();
        std::fs::create_dir_all(&dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        let snapshot = cfg.snapshot();
        write_json(&dir.join(CONFIG_FILE), &snapshot).context("output directory is not writable")?;
        let manifest = RunManifest::open(&dir, snapshot)?;
        let timings = match dir.join(TIMINGS_FILE) {
            p if p.exists() => read_json(&p).unwrap_or_default(),
            _ => BTreeMap::new(),
        };
        Ok(Pipeline {
            cfg,
            dir,
            manifest,
            timings,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn manifest(&self) -> &RunManifest {
        &self.manifest
    }

    /// Run every stage up to evaluation, then the sensitivity analysis when
    /// at least two first-level clusters were selected.
    pub fn run_all(&mut self) -> Result<EvaluationReport> {
        for stage in Stage::ALL {
            if stage == Stage::Sensitivity {
                let sel: SelectionFile = read_json(&self.path("selection.json"))?;
                if sel.level1_clusters.len() < 2 {
                    log::warn!(
                        "skipping sensitivity: {} first-level cluster(s) selected, need 2",
                        sel.level1_clusters.len()
                    );
                    continue;
                }
            }
            self.run_stage(stage)?;
        }
        read_json(&self.path("report.json"))
    }

    pub fn run_stage(&mut self, stage: Stage) -> Result<StageStatus> {
        self.run_stage_inner(stage).with_context(|| format!("stage {}", stage.name()))
    }

    fn run_stage_inner(&mut self, stage: Stage) -> Result<StageStatus> {
        let name = stage.name();
        let seed = stage_seed(self.cfg.seed, name);
        let params = json!({ "stage": name, "seed": seed, "params": self.params(stage) });
        let params_sha256 = sha256_hex(&serde_json::to_vec(&params)?);

        let mut inputs = Vec::new();
        for &artifact in stage.inputs() {
            let upstream = Stage::producing(artifact).expect("every input has a producer").name();
            let path = self.path(artifact);
            let recorded = self.manifest.producer(artifact).map(|(_, a)| a.sha256.clone());
            let (Some(recorded), true) = (recorded, path.exists()) else {
                bail!("missing upstream artifact {artifact}; run stage `{upstream}` first");
            };
            let sha256 = sha256_file(&path)?;
            if sha256 != recorded {
                bail!("stale artifact {artifact}: it changed after stage `{upstream}` wrote it; re-run `{upstream}`");
            }
            inputs.push(Artifact {
                path: artifact.to_string(),
                sha256,
            });
        }
        for path in self.external_inputs(stage) {
            inputs.push(Artifact {
                sha256: sha256_file(&path)?,
                path: path.display().to_string(),
            });
        }

        if let Some(prev) = self.manifest.stages.get(name) {
            let outputs_intact = prev
                .outputs
                .iter()
                .all(|o| sha256_file(&self.path(&o.path)).is_ok_and(|s| s == o.sha256));
            if prev.params_sha256 == params_sha256 && prev.inputs == inputs && outputs_intact {
                log::info!("{name}: cached");
                let record = self.manifest.stages.get_mut(name).expect("present");
                record.status = StageStatus::Cached;
                self.manifest.save(&self.dir)?;
                return Ok(StageStatus::Cached);
            }
        }

        let start = Instant::now();
        log::info!("{name}: running");
        self.execute(stage, seed)?;
        let outputs = stage
            .outputs()
            .iter()
            .map(|&o| {
                Ok(Artifact {
                    path: o.to_string(),
                    sha256: sha256_file(&self.path(o))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        self.manifest.stages.insert(
            name.to_string(),
            StageRecord {
                status: StageStatus::Executed,
                seed,
                params_sha256,
                inputs,
                outputs,
            },
        );
        self.manifest.save(&self.dir)?;
        self.timings.insert(name.to_string(), start.elapsed().as_secs_f64());
        write_json(&self.dir.join(TIMINGS_FILE), &self.timings)?;
        Ok(StageStatus::Executed)
    }

    fn path(&self, artifact: &str) -> PathBuf {
        self.dir.join(artifact)
    }

    /// The config fragment each stage depends on.
    fn params(&self, stage: Stage) -> serde_json::Value {
        let c = &self.cfg;
        match stage {
            Stage::Synth => json!({ "corpus": c.corpus }),
            Stage::Extract => json!({ "rules": c.rules }),
            Stage::Embed => json!({
                "abbreviations": c.abbreviations,
                "embedder": c.embedder,
                "pca_dim": c.pca_dim,
            }),
            Stage::Cluster => json!({ "hdbscan": c.hdbscan }),
            Stage::Keywords => json!({
                "abbreviations": c.abbreviations,
                "embedder": c.embedder,
                "keywords": c.keywords,
                "level2": c.level2,
            }),
            Stage::Label => json!({ "definitions": c.definitions, "selection_level": c.selection_level }),
            Stage::Train => json!({
                "embedder": c.embedder,
                "train": c.train,
                "labels": c.labels,
                "variant": c.variant,
            }),
            Stage::Evaluate => json!({
                "embedder": c.embedder,
                "train": c.train,
                "labels": c.labels,
                "variant": c.variant,
                "eval": c.eval,
            }),
            Stage::Sensitivity => json!({
                "embedder": c.embedder,
                "train": c.train,
                "variant": c.variant,
                "k": c.eval.k,
            }),
        }
    }

    /// Files outside the output directory that a stage reads.
    fn external_inputs(&self, stage: Stage) -> Vec<PathBuf> {
        match (stage, &self.cfg.corpus) {
            (Stage::Synth, CorpusSource::Path(p)) => vec![p.clone()],
            (Stage::Embed, _) if self.cfg.embedder.provider == EmbedderProvider::ExternalFile => {
                self.cfg.external_embeddings.iter().cloned().collect()
            }
            _ => Vec::new(),
        }
    }

    fn execute(&self, stage: Stage, seed: u64) -> Result<()> {
        match stage {
            Stage::Synth => self.synth(seed),
            Stage::Extract => self.extract(),
            Stage::Embed => self.embed(),
            Stage::Cluster => self.cluster(),
            Stage::Keywords => self.keywords(),
            Stage::Label => self.label(),
            Stage::Train => self.train(seed),
            Stage::Evaluate => self.evaluate(seed),
            Stage::Sensitivity => self.sensitivity(seed),
        }
    }

    fn corpus(&self) -> Result<Corpus> {
        Ok(Corpus::load(&self.path("corpus.jsonl"))?)
    }

    fn extraction(&self, corpus: &Corpus) -> Result<diagweak_core::extraction::Extraction> {
        extraction_from_rows(corpus, read_csv(&self.path("extraction.csv"))?)
    }

    fn weak_labels(&self, corpus: &Corpus) -> Result<Vec<bool>> {
        weak_labels_for(corpus, &read_csv::<WeakLabelRow>(&self.path("weak_labels.csv"))?)
    }

    /// The first-level cluster of each letter's string, in corpus order.
    fn letter_level1(&self, corpus: &Corpus) -> Result<Vec<Option<usize>>> {
        let letters: Vec<LetterStringRow> = read_csv(&self.path("letter_strings.csv"))?;
        let assignment: Vec<AssignmentRow> = read_csv(&self.path("assignment.csv"))?;
        if letters.len() != corpus.len() {
            bail!("letter_strings.csv does not match the corpus");
        }
        Ok(letters
            .iter()
            .map(|l| {
                l.string_id
                    .and_then(|s| assignment.get(s))
                    .and_then(|a| usize::try_from(a.label).ok())
            })
            .collect())
    }

    fn synth(&self, seed: u64) -> Result<()> {
        let corpus = match &self.cfg.corpus {
            CorpusSource::Synthetic(s) => generate_synthetic(s, seed)?,
            CorpusSource::Path(p) => Corpus::load(p)?,
        };
        log::info!("corpus: {} letters", corpus.len());
        Ok(corpus.save(&self.path("corpus.jsonl"))?)
    }

    fn extract(&self) -> Result<()> {
        let corpus = self.corpus()?;
        let ex = extract_all(&corpus, self.cfg.rules())?;
        log::info!(
            "extraction: {} of {} letters ({:.1}%), {} unique strings",
            ex.diagnoses.len(),
            ex.n_letters,
            100.0 * ex.coverage,
            ex.unique_trimmed
        );
        write_csv(&self.path("extraction.csv"), ex.diagnoses.iter().map(ExtractionRow::from))?;
        write_json(
            &self.path("extraction.json"),
            &ExtractionSummary {
                n_letters: ex.n_letters,
                with_diagnosis: ex.diagnoses.len(),
                coverage: ex.coverage,
                unique_trimmed: ex.unique_trimmed,
            },
        )
    }

    fn embed(&self) -> Result<()> {
        let rows: Vec<ExtractionRow> = read_csv(&self.path("extraction.csv"))?;
        let abbr = self.cfg.abbreviations();
        let normalized: Vec<(String, TokenList)> =
            rows.iter().map(|r| (r.letter_id.clone(), normalize(&r.trimmed, abbr))).collect();
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for (_, t) in normalized.iter().filter(|(_, t)| !t.is_empty()) {
            *counts.entry(t.joined()).or_default() += 1;
        }
        let degenerate = normalized.iter().filter(|(_, t)| t.is_empty()).count();
        if degenerate > 0 {
            log::warn!("{degenerate} diagnosis strings are empty after normalisation and are left unclustered");
        }
        let keys: Vec<&String> = counts.keys().collect();
        if keys.len() < 2 {
            bail!("need at least 2 unique diagnosis strings to cluster, found {}", keys.len());
        }
        write_csv(
            &self.path("strings.csv"),
            counts.iter().enumerate().map(|(i, (text, &n))| StringRow {
                string_id: i,
                text: text.clone(),
                n_letters: n,
            }),
        )?;

        let by_letter: BTreeMap<&str, usize> = normalized
            .iter()
            .filter(|(_, t)| !t.is_empty())
            .map(|(id, t)| (id.as_str(), keys.binary_search(&&t.joined()).expect("key present")))
            .collect();
        let corpus = self.corpus()?;
        write_csv(
            &self.path("letter_strings.csv"),
            corpus.iter().map(|l| LetterStringRow {
                letter_id: l.id.clone(),
                string_id: by_letter.get(l.id.as_str()).copied(),
            }),
        )?;

        let vectors: Vec<EmbeddingVector> = match self.cfg.embedder.provider {
            EmbedderProvider::HashedNgram => keys
                .iter()
                .map(|k| embed_text(&tokenize_all(k), &self.cfg.embedder))
                .collect::<diagweak_core::Result<_>>()?,
            EmbedderProvider::ExternalFile => {
                let path = self.cfg.external_embeddings.as_ref().expect("validated");
                let expected: BTreeSet<String> = keys.iter().map(|k| k.to_string()).collect();
                let mut map = load_external_embeddings(path, &expected)?;
                keys.iter().map(|k| map.remove(*k).expect("loader checks coverage")).collect()
            }
        };
        let k = self.cfg.pca_dim.min(vectors.len() - 1);
        if k < self.cfg.pca_dim {
            log::warn!("pca_dim {} reduced to {k} for {} strings", self.cfg.pca_dim, vectors.len());
        }
        let pca = fit_pca(&vectors, k)?;
        let points = vectors
            .iter()
            .map(|v| project_pca(&pca, v))
            .collect::<diagweak_core::Result<Vec<_>>>()?;
        log::info!(
            "embedding: {} strings, PCA {} -> {k} keeps {:.1}% of variance",
            keys.len(),
            pca.dim(),
            100.0 * pca.explained_ratio()
        );
        write_json(
            &self.path("reduced.json"),
            &Reduced {
                dim: k,
                explained_ratio: pca.explained_ratio(),
                points,
            },
        )?;
        write_json(&self.path("pca.json"), &pca)
    }

    fn cluster(&self) -> Result<()> {
        let reduced: Reduced = read_json(&self.path("reduced.json"))?;
        let (tree, assignment) = cluster_with_tree(&reduced.points, &self.cfg.hdbscan)?;
        log::info!(
            "level 1: {} clusters, {} of {} strings are noise",
            assignment.n_clusters,
            assignment.noise_count(),
            assignment.len()
        );
        write_csv(
            &self.path("assignment.csv"),
            assignment
                .labels
                .iter()
                .zip(&assignment.probabilities)
                .enumerate()
                .map(|(i, (&label, &probability))| AssignmentRow {
                    string_id: i,
                    label,
                    probability,
                }),
        )?;
        std::fs::write(self.path("condensed_tree.csv"), tree.to_csv())?;
        write_json(
            &self.path("cluster.json"),
            &ClusterSummaryFile {
                n_strings: assignment.len(),
                n_clusters: assignment.n_clusters,
                noise: assignment.noise_count(),
            },
        )
    }

    fn keywords(&self) -> Result<()> {
        let corpus = self.corpus()?;
        let abbr = self.cfg.abbreviations();
        let strings: Vec<StringRow> = read_csv(&self.path("strings.csv"))?;
        let tokens: Vec<TokenList> = strings.iter().map(|s| tokenize_all(&s.text)).collect();
        let assignment: Vec<AssignmentRow> = read_csv(&self.path("assignment.csv"))?;
        let summary: ClusterSummaryFile = read_json(&self.path("cluster.json"))?;
        if assignment.len() != tokens.len() {
            bail!("assignment.csv and strings.csv disagree in length");
        }
        let labels: Vec<i64> = assignment.iter().map(|a| a.label).collect();
        let docs: Vec<TokenList> = corpus.iter().map(|l| normalize(&l.stripped_text(), abbr)).collect();
        let stats = CorpusStats::from_documents(&docs);
        let level1 = summarize_level1(&tokens, &labels, summary.n_clusters, &stats, &self.cfg.keywords)?;
        let level2 =
            second_level_merge(&level1, &tokens, &stats, &self.cfg.embedder, &self.cfg.level2, &self.cfg.keywords)?;
        log::info!("keywords: {} first-level, {} second-level clusters", level1.len(), level2.len());
        let rows: Vec<ClusterRow> = level1
            .iter()
            .chain(&level2)
            .map(|s| ClusterRow {
                level: s.level,
                cluster_id: s.cluster_id,
                size: s.size,
                keywords: s.display_keywords().join(" "),
                children: s.children.iter().map(usize::to_string).collect::<Vec<_>>().join(" "),
                flagged: s.flagged,
            })
            .collect();
        write_csv(&self.path("clusters.csv"), rows)?;
        write_json(&self.path("clusters.json"), &ClusterLevels { level1, level2 })
    }

    fn label(&self) -> Result<()> {
        let corpus = self.corpus()?;
        let levels: ClusterLevels = read_json(&self.path("clusters.json"))?;
        let letters: Vec<LetterStringRow> = read_csv(&self.path("letter_strings.csv"))?;
        let level = self.cfg.selection_level;
        let summaries = if level == 1 { &levels.level1 } else { &levels.level2 };
        let defs = self.cfg.definitions();
        let selection = select_clusters(summaries, defs)?;
        let mut string_cluster: BTreeMap<usize, usize> = BTreeMap::new();
        for s in summaries {
            for &m in &s.member_string_ids {
                string_cluster.insert(m, s.cluster_id);
            }
        }
        let letter_cluster: BTreeMap<String, usize> = letters
            .iter()
            .filter_map(|l| Some((l.letter_id.clone(), *string_cluster.get(&l.string_id?)?)))
            .collect();
        let weak = assign_weak_labels(&corpus, &letter_cluster, &selection, defs);
        let level1_clusters: Vec<usize> = if level == 1 {
            selection.selected.clone()
        } else {
            let mut c: Vec<usize> =
                selection.selected.iter().flat_map(|&s| levels.level2[s].children.iter().copied()).collect();
            c.sort_unstable();
            c
        };
        log::info!(
            "weak labels: {} positives of {} letters from level-{level} clusters {:?}",
            weak.positives(),
            corpus.len(),
            selection.selected
        );
        write_csv(
            &self.path("weak_labels.csv"),
            weak.labels.iter().map(|l| WeakLabelRow {
                letter_id: l.letter_id.clone(),
                label: u8::from(l.label),
                cluster_id: l.cluster_id,
                fired_definition: l.fired_definition.clone(),
            }),
        )?;
        write_json(
            &self.path("selection.json"),
            &SelectionFile {
                positives: weak.positives(),
                n_letters: corpus.len(),
                level1_clusters,
                selection,
            },
        )
    }

    fn train_labels(&self, corpus: &Corpus, source: LabelSource) -> Result<Vec<bool>> {
        match source {
            LabelSource::Weak => self.weak_labels(corpus),
            LabelSource::Gold => corpus
                .iter()
                .map(|l| l.gold_label.ok_or_else(|| anyhow!("letter {} has no gold label", l.id)))
                .collect(),
        }
    }

    fn train(&self, seed: u64) -> Result<()> {
        let corpus = self.corpus()?;
        let ex = self.extraction(&corpus)?;
        let labels = self.train_labels(&corpus, self.cfg.labels)?;
        let cfg = diagweak_core::TrainConfig {
            seed,
            ..self.cfg.train.clone()
        };
        let model = train_on_corpus(&corpus, &ex, &labels, self.cfg.variant, &cfg, &self.cfg.embedder, self.cfg.labels)?;
        log::info!("model: final training loss {:.4}", model.final_loss);
        write_json(&self.path("model.json"), &model)
    }

    fn evaluate(&self, seed: u64) -> Result<()> {
        let corpus = self.corpus()?;
        let ex = self.extraction(&corpus)?;
        let weak = self.weak_labels(&corpus)?;
        let cfg = diagweak_core::TrainConfig {
            seed,
            ..self.cfg.train.clone()
        };
        let fp = self.cfg.embedder.fingerprint();
        let k = self.cfg.eval.k;

        let variants = [InputVariant::WithDiagnosis, InputVariant::WithoutDiagnosis];
        let features = variants
            .iter()
            .map(|&v| Ok(corpus_features(&corpus, &ex, v, &cfg, &self.cfg.embedder)?))
            .collect::<Result<Vec<_>>>()?;
        let data: Vec<EvalData> = features
            .iter()
            .map(|f| EvalData::new(&corpus, f, weak.clone()))
            .collect::<diagweak_core::Result<_>>()?;
        let plan = fold_plan(&data[0], k, seed)?;
        let fully_gold = data[0].fully_gold();
        if self.cfg.labels == LabelSource::Gold && !fully_gold {
            bail!("labels = gold needs a gold label on every letter");
        }

        let term = &self.cfg.eval.rule_term;
        let rule = |scope| -> Vec<bool> { corpus.iter().map(|l| rule_classify(l, ex.get(&l.id), scope, term)).collect() };
        let mut rows = vec![
            evaluate_rule("RB-full", &data[0], &plan, &rule(RuleScope::FullText)),
            evaluate_rule("RB-diagnosis", &data[0], &plan, &rule(RuleScope::DiagnosisOnly)),
        ];
        let sources: &[LabelSource] = if fully_gold {
            &[LabelSource::Weak, LabelSource::Gold]
        } else {
            &[LabelSource::Weak]
        };
        let primary = row_name(self.cfg.labels, self.cfg.variant);
        let mut primary_outcomes = None;
        for &source in sources {
            for (vi, &variant) in variants.iter().enumerate() {
                let name = row_name(source, variant);
                let (report, outcomes) = run_cv(name.clone(), &data[vi], &plan, source, variant, &cfg, &fp)?;
                if name == primary {
                    primary_outcomes = Some((vi, outcomes));
                }
                rows.push(report);
            }
        }
        let (pvi, outcomes) = primary_outcomes.expect("primary row evaluated");
        let subgroups = run_subgroup(&data[pvi], &plan, &outcomes, self.cfg.labels, self.cfg.variant, cfg.threshold);
        let logo = [GroupBy::Hospital, GroupBy::Lhu]
            .into_iter()
            .map(|group_by| {
                match run_logo(&data[pvi], group_by, self.cfg.eval.logo_min_positives, self.cfg.labels, &cfg, &fp) {
                    Ok(r) => LogoOutcome {
                        group_by,
                        report: Some(r),
                        error: None,
                    },
                    Err(e) => {
                        log::warn!("leave-one-group-out by {group_by:?}: {e}");
                        LogoOutcome {
                            group_by,
                            report: None,
                            error: Some(e.to_string()),
                        }
                    }
                }
            })
            .collect();

        let report = EvaluationReport {
            n_letters: corpus.len(),
            weak_positives: weak.iter().filter(|&&w| w).count(),
            gold_positives: fully_gold.then(|| corpus.iter().filter(|l| l.gold_label == Some(true)).count()),
            k,
            stratified_on: plan.stratify_on,
            primary,
            rows,
            subgroups,
            logo,
        };
        if let Some(f1) = report.row(&report.primary).and_then(|r| r.gold_f1()) {
            log::info!("{}: mean gold F1 {:.4}", report.primary, f1);
        }
        write_json(&self.path("report.json"), &report)?;
        std::fs::write(self.path("report.txt"), report.to_text())?;
        write_folds_csv(&self.path("folds.csv"), &report)
    }

    fn sensitivity(&self, seed: u64) -> Result<()> {
        let corpus = self.corpus()?;
        let ex = self.extraction(&corpus)?;
        let levels: ClusterLevels = read_json(&self.path("clusters.json"))?;
        let selection: SelectionFile = read_json(&self.path("selection.json"))?;
        let letter_l1 = self.letter_level1(&corpus)?;
        let cfg = diagweak_core::TrainConfig {
            seed,
            ..self.cfg.train.clone()
        };
        let variant = self.cfg.variant;
        let features = corpus_features(&corpus, &ex, variant, &cfg, &self.cfg.embedder)?;
        let all: BTreeSet<usize> = selection.level1_clusters.iter().copied().collect();
        let weak = diagweak_core::eval::weak_from_clusters(&letter_l1, &all);
        let data = EvalData::new(&corpus, &features, weak)?;
        let plan = fold_plan(&data, self.cfg.eval.k, seed)?;
        let analysis = cluster_sensitivity(
            &data,
            &plan,
            &letter_l1,
            &selection.level1_clusters,
            variant,
            &cfg,
            &self.cfg.embedder.fingerprint(),
        )?;
        let doc = SensitivityDocument::new(analysis, |c| levels.level1[c].display_keywords());
        write_json(&self.path("sensitivity.json"), &doc)?;
        std::fs::write(self.path("sensitivity.txt"), doc.to_text())?;
        Ok(())
    }
}

#[derive(Serialize)]
struct FoldRow<'a> {
    model: &'a str,
    fold: usize,
    labels: &'a str,
    precision: Option<f64>,
    recall: Option<f64>,
    f1: Option<f64>,
    auc: Option<f64>,
    support: Option<usize>,
    note: Option<&'a str>,
}

fn write_folds_csv(path: &Path, report: &EvaluationReport) -> Result<()> {
    let mut rows = Vec::new();
    for r in &report.rows {
        for f in &r.folds {
            for (labels, m) in [("weak", &f.weak), ("gold", &f.gold)] {
                if m.is_none() && f.note.is_none() {
                    continue;
                }
                rows.push(FoldRow {
                    model: &r.name,
                    fold: f.fold,
                    labels,
                    precision: m.map(|m| m.precision),
                    recall: m.map(|m| m.recall),
                    f1: m.map(|m| m.f1),
                    auc: m.and_then(|m| m.auc),
                    support: m.map(|m| m.support),
                    note: f.note.as_deref(),
                });
            }
        }
    }
    write_csv(path, rows)
}
