//! Evaluation protocol: stratified cross-validation against weak and gold
//! labels, leave-one-group-out, pediatric subgroups and cluster-exclusion
//! sensitivity.
//!
//! Standard deviations are sample standard deviations over fold values.

mod folds;
mod metrics;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{train_classifier, InputVariant, LabelSource, LetterFeatures, TrainConfig};
use crate::corpus::{Corpus, UNKNOWN_GROUP};
use crate::error::{Error, Result};

pub use folds::{stratified_folds, FoldPlan};
pub use metrics::{adjusted_rand_index, f1_score, mean_std, prf1, roc_auc, MeanStd, Metrics};

/// Per-letter inputs of an evaluation, aligned with corpus order.
#[derive(Debug, Clone)]
pub struct EvalData<'a> {
    pub letter_ids: Vec<String>,
    pub features: &'a [LetterFeatures],
    pub weak: Vec<bool>,
    pub gold: Vec<Option<bool>>,
    pub pediatric: Vec<bool>,
    pub hospital: Vec<String>,
    pub lhu: Vec<String>,
}

impl<'a> EvalData<'a> {
    pub fn new(corpus: &Corpus, features: &'a [LetterFeatures], weak: Vec<bool>) -> Result<Self> {
        if features.len() != corpus.len() || weak.len() != corpus.len() {
            return Err(Error::LengthMismatch {
                left: corpus.len(),
                right: features.len().min(weak.len()),
            });
        }
        Ok(EvalData {
            letter_ids: corpus.iter().map(|l| l.id.clone()).collect(),
            features,
            weak,
            gold: corpus.iter().map(|l| l.gold_label).collect(),
            pediatric: corpus.iter().map(|l| l.is_pediatric()).collect(),
            hospital: corpus.iter().map(|l| l.hospital_id.clone()).collect(),
            lhu: corpus.iter().map(|l| l.lhu_id.clone()).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.letter_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letter_ids.is_empty()
    }

    /// Every letter carries a gold label.
    pub fn fully_gold(&self) -> bool {
        self.gold.iter().all(Option::is_some)
    }

    pub fn has_gold(&self) -> bool {
        self.gold.iter().any(Option::is_some)
    }

    pub fn with_weak(&self, weak: Vec<bool>) -> Self {
        EvalData { weak, ..self.clone() }
    }

    fn train_label(&self, i: usize, source: LabelSource) -> Option<bool> {
        match source {
            LabelSource::Weak => Some(self.weak[i]),
            LabelSource::Gold => self.gold[i],
        }
    }
}

/// Folds stratified on gold labels when every letter has one, else on weak
/// labels, so that weak- and gold-trained models share the same folds.
pub fn fold_plan(data: &EvalData, k: usize, seed: u64) -> Result<FoldPlan> {
    if data.fully_gold() && data.gold.contains(&Some(true)) {
        let gold: Vec<bool> = data.gold.iter().map(|g| g.unwrap_or(false)).collect();
        stratified_folds(&gold, k, seed, LabelSource::Gold)
    } else {
        stratified_folds(&data.weak, k, seed, LabelSource::Weak)
    }
}

/// Out-of-fold scores of one fold, or the reason it was skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    pub fold: usize,
    pub test: Vec<usize>,
    pub scores: Option<Vec<f64>>,
    pub skipped: Option<String>,
}

/// Seed of the model trained for `fold`.
pub fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(fold as u64)
}

fn train_and_score(
    data: &EvalData,
    train: &[usize],
    test: &[usize],
    source: LabelSource,
    cfg: &TrainConfig,
    fingerprint: &str,
) -> Result<std::result::Result<Vec<f64>, String>> {
    let (xs, ys): (Vec<&[f64]>, Vec<bool>) = train
        .iter()
        .filter_map(|&i| data.train_label(i, source).map(|y| (data.features[i].training_vector(), y)))
        .unzip();
    if xs.is_empty() {
        return Ok(Err("no labelled training letters".into()));
    }
    match train_classifier(&xs, &ys, cfg, fingerprint, source) {
        Ok(model) => Ok(Ok(test.iter().map(|&i| model.predict_chunks(&data.features[i].chunks)).collect())),
        Err(Error::SingleClass) => Ok(Err("training labels contain a single class".into())),
        Err(e) => Err(e),
    }
}

/// Train on k−1 folds and score the held-out fold, for every fold.
pub fn cross_validate(
    data: &EvalData,
    plan: &FoldPlan,
    source: LabelSource,
    cfg: &TrainConfig,
    fingerprint: &str,
) -> Result<Vec<FoldOutcome>> {
    (0..plan.k)
        .into_par_iter()
        .map(|fold| {
            let test = plan.test_indices(fold);
            let train = plan.train_indices(fold);
            let fold_cfg = TrainConfig {
                seed: fold_seed(cfg.seed, fold),
                ..cfg.clone()
            };
            let outcome = train_and_score(data, &train, &test, source, &fold_cfg, fingerprint)?;
            if let Err(reason) = &outcome {
                log::warn!("fold {fold} skipped: {reason}");
            }
            Ok(FoldOutcome {
                fold,
                test,
                skipped: outcome.as_ref().err().cloned(),
                scores: outcome.ok(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub weak: Option<Metrics>,
    pub gold: Option<Metrics>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub f1: MeanStd,
    pub auc: Option<MeanStd>,
}

impl MetricSummary {
    fn from_folds<'m>(metrics: impl Iterator<Item = &'m Metrics> + Clone) -> Option<Self> {
        let pick = |f: fn(&Metrics) -> f64| mean_std(&metrics.clone().map(f).collect::<Vec<_>>());
        let aucs: Vec<f64> = metrics.clone().filter_map(|m| m.auc).collect();
        Some(MetricSummary {
            precision: pick(|m| m.precision)?,
            recall: pick(|m| m.recall)?,
            f1: pick(|m| m.f1)?,
            auc: mean_std(&aucs),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub name: String,
    /// `None` for rule-based classifiers.
    pub trained_on: Option<LabelSource>,
    pub variant: Option<InputVariant>,
    pub k: usize,
    pub seed: u64,
    pub threshold: f64,
    pub folds: Vec<FoldMetrics>,
    pub weak: Option<MetricSummary>,
    pub gold: Option<MetricSummary>,
}

impl EvalReport {
    fn from_folds(
        name: impl Into<String>,
        trained_on: Option<LabelSource>,
        variant: Option<InputVariant>,
        plan: &FoldPlan,
        threshold: f64,
        folds: Vec<FoldMetrics>,
    ) -> Self {
        let weak = MetricSummary::from_folds(folds.iter().filter_map(|f| f.weak.as_ref()));
        let gold = MetricSummary::from_folds(folds.iter().filter_map(|f| f.gold.as_ref()));
        EvalReport {
            name: name.into(),
            trained_on,
            variant,
            k: plan.k,
            seed: plan.seed,
            threshold,
            folds,
            weak,
            gold,
        }
    }

    pub fn skipped_folds(&self) -> Vec<usize> {
        self.folds.iter().filter(|f| f.note.is_some()).map(|f| f.fold).collect()
    }

    pub fn gold_f1(&self) -> Option<f64> {
        self.gold.as_ref().map(|g| g.f1.mean)
    }
}

/// Metrics of predictions on `idx` against one label column. Letters
/// without a label are ignored; a set without positives yields `None`.
fn metrics_on(idx: &[usize], labels: impl Fn(usize) -> Option<bool>, preds: &[bool], scores: Option<&[f64]>) -> Option<Metrics> {
    let mut p = Vec::new();
    let mut y = Vec::new();
    let mut s = Vec::new();
    for (pos, &i) in idx.iter().enumerate() {
        if let Some(label) = labels(i) {
            p.push(preds[pos]);
            y.push(label);
            if let Some(sc) = scores {
                s.push(sc[pos]);
            }
        }
    }
    let mut m = prf1(&p, &y).ok()?;
    if scores.is_some() {
        m.auc = roc_auc(&s, &y).ok();
    }
    Some(m)
}

fn fold_metrics(
    data: &EvalData,
    fold: usize,
    idx: &[usize],
    preds: &[bool],
    scores: Option<&[f64]>,
    with_weak: bool,
) -> FoldMetrics {
    let weak = if with_weak {
        metrics_on(idx, |i| Some(data.weak[i]), preds, scores)
    } else {
        None
    };
    let gold = metrics_on(idx, |i| data.gold[i], preds, scores);
    let note = match (with_weak && weak.is_none(), data.has_gold() && gold.is_none()) {
        (true, true) => Some("no weak or gold positives in test set".to_string()),
        (true, false) => Some("no weak positives in test set".to_string()),
        (false, true) => Some("no gold positives in test set".to_string()),
        (false, false) => None,
    };
    FoldMetrics { fold, weak, gold, note }
}

/// Aggregate out-of-fold scores, optionally restricted to a subset of letters.
#[allow(clippy::too_many_arguments)]
pub fn summarize_outcomes(
    name: impl Into<String>,
    data: &EvalData,
    plan: &FoldPlan,
    outcomes: &[FoldOutcome],
    source: LabelSource,
    variant: InputVariant,
    threshold: f64,
    keep: &(dyn Fn(usize) -> bool + Sync),
) -> EvalReport {
    let folds = outcomes
        .iter()
        .map(|o| {
            let Some(scores) = &o.scores else {
                return FoldMetrics {
                    fold: o.fold,
                    weak: None,
                    gold: None,
                    note: o.skipped.clone(),
                };
            };
            let (idx, sc): (Vec<usize>, Vec<f64>) =
                o.test.iter().zip(scores).filter(|(i, _)| keep(**i)).map(|(&i, &s)| (i, s)).unzip();
            if idx.is_empty() {
                return FoldMetrics {
                    fold: o.fold,
                    weak: None,
                    gold: None,
                    note: Some("empty subgroup".into()),
                };
            }
            let preds: Vec<bool> = sc.iter().map(|&s| s >= threshold).collect();
            fold_metrics(data, o.fold, &idx, &preds, Some(&sc), source == LabelSource::Weak)
        })
        .collect();
    EvalReport::from_folds(name, Some(source), Some(variant), plan, threshold, folds)
}

/// Cross-validated evaluation of a classifier trained on `source` labels.
/// Gold-trained models are evaluated against gold labels only.
pub fn run_cv(
    name: impl Into<String>,
    data: &EvalData,
    plan: &FoldPlan,
    source: LabelSource,
    variant: InputVariant,
    cfg: &TrainConfig,
    fingerprint: &str,
) -> Result<(EvalReport, Vec<FoldOutcome>)> {
    let outcomes = cross_validate(data, plan, source, cfg, fingerprint)?;
    let report = summarize_outcomes(name, data, plan, &outcomes, source, variant, cfg.threshold, &|_| true);
    Ok((report, outcomes))
}

/// Fold-wise metrics of fixed predictions, such as a rule classifier's.
pub fn evaluate_rule(name: impl Into<String>, data: &EvalData, plan: &FoldPlan, predictions: &[bool]) -> EvalReport {
    let folds = (0..plan.k)
        .map(|fold| {
            let idx = plan.test_indices(fold);
            let preds: Vec<bool> = idx.iter().map(|&i| predictions[i]).collect();
            fold_metrics(data, fold, &idx, &preds, None, true)
        })
        .collect();
    EvalReport::from_folds(name, None, None, plan, 0.5, folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgroupReport {
    pub pediatric: EvalReport,
    pub non_pediatric: EvalReport,
}

/// Split each test fold into pediatric and non-pediatric letters and
/// evaluate the two halves separately.
pub fn run_subgroup(
    data: &EvalData,
    plan: &FoldPlan,
    outcomes: &[FoldOutcome],
    source: LabelSource,
    variant: InputVariant,
    threshold: f64,
) -> SubgroupReport {
    let ped = |i: usize| data.pediatric[i];
    let non = |i: usize| !data.pediatric[i];
    SubgroupReport {
        pediatric: summarize_outcomes("pediatric", data, plan, outcomes, source, variant, threshold, &ped),
        non_pediatric: summarize_outcomes("non_pediatric", data, plan, outcomes, source, variant, threshold, &non),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    Hospital,
    Lhu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupResult {
    pub group: String,
    pub n_letters: usize,
    pub positives: usize,
    pub weak: Option<Metrics>,
    pub gold: Option<Metrics>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogoReport {
    pub group_by: GroupBy,
    pub min_positives: usize,
    /// Which labels were counted for the positive-count filter.
    pub counted_on: LabelSource,
    pub groups: Vec<GroupResult>,
    /// Groups below the positive-count filter, with their counts.
    pub excluded: Vec<(String, usize)>,
}

/// Leave-one-group-out: each retained group is scored by a model trained on
/// every other letter. Groups with fewer than `min_positives` positives (gold
/// when every letter has a gold label, weak otherwise) and the unknown group
/// are not held out.
pub fn run_logo(
    data: &EvalData,
    group_by: GroupBy,
    min_positives: usize,
    source: LabelSource,
    cfg: &TrainConfig,
    fingerprint: &str,
) -> Result<LogoReport> {
    let groups = match group_by {
        GroupBy::Hospital => &data.hospital,
        GroupBy::Lhu => &data.lhu,
    };
    let counted_on = if data.fully_gold() { LabelSource::Gold } else { LabelSource::Weak };
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, g) in groups.iter().enumerate() {
        let positive = match counted_on {
            LabelSource::Gold => data.gold[i] == Some(true),
            LabelSource::Weak => data.weak[i],
        };
        *counts.entry(g.as_str()).or_default() += usize::from(positive);
    }
    let mut retained = Vec::new();
    let mut excluded = Vec::new();
    for (&g, &c) in &counts {
        if g != UNKNOWN_GROUP && c >= min_positives {
            retained.push(g.to_string());
        } else {
            excluded.push((g.to_string(), c));
        }
    }
    if retained.len() < 2 {
        return Err(Error::Parameter(format!(
            "leave-one-group-out needs at least 2 groups with >= {min_positives} positives, found {}",
            retained.len()
        )));
    }
    let results = retained
        .par_iter()
        .enumerate()
        .map(|(gi, g)| {
            let test: Vec<usize> = (0..data.len()).filter(|&i| groups[i] == *g).collect();
            let train: Vec<usize> = (0..data.len()).filter(|&i| groups[i] != *g).collect();
            let group_cfg = TrainConfig {
                seed: fold_seed(cfg.seed, gi),
                ..cfg.clone()
            };
            let positives = counts[g.as_str()];
            let outcome = train_and_score(data, &train, &test, source, &group_cfg, fingerprint)?;
            Ok(match outcome {
                Ok(scores) => {
                    let preds: Vec<bool> = scores.iter().map(|&s| s >= cfg.threshold).collect();
                    let fm = fold_metrics(data, gi, &test, &preds, Some(&scores), source == LabelSource::Weak);
                    GroupResult {
                        group: g.clone(),
                        n_letters: test.len(),
                        positives,
                        weak: fm.weak,
                        gold: fm.gold,
                        note: fm.note,
                    }
                }
                Err(reason) => GroupResult {
                    group: g.clone(),
                    n_letters: test.len(),
                    positives,
                    weak: None,
                    gold: None,
                    note: Some(reason),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LogoReport {
        group_by,
        min_positives,
        counted_on,
        groups: results,
        excluded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub cluster: usize,
    /// Letters whose diagnosis string lies in the excluded cluster.
    pub letters_covered: usize,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub baseline: EvalReport,
    pub exclusions: Vec<Exclusion>,
}

/// Weak labels from the first-level cluster of each letter's string.
pub fn weak_from_clusters(letter_clusters: &[Option<usize>], selected: &BTreeSet<usize>) -> Vec<bool> {
    letter_clusters.iter().map(|c| c.is_some_and(|c| selected.contains(&c))).collect()
}

/// Re-run cross-validation once per selected first-level cluster, with that
/// cluster removed from the weak-label rule. All runs share `plan`.
#[allow(clippy::too_many_arguments)]
pub fn cluster_sensitivity(
    data: &EvalData,
    plan: &FoldPlan,
    letter_clusters: &[Option<usize>],
    selected: &[usize],
    variant: InputVariant,
    cfg: &TrainConfig,
    fingerprint: &str,
) -> Result<SensitivityReport> {
    if selected.len() < 2 {
        return Err(Error::Parameter(format!(
            "sensitivity analysis needs at least 2 selected clusters, found {}",
            selected.len()
        )));
    }
    let all: BTreeSet<usize> = selected.iter().copied().collect();
    let base_data = data.with_weak(weak_from_clusters(letter_clusters, &all));
    let (baseline, _) = run_cv("all selected clusters", &base_data, plan, LabelSource::Weak, variant, cfg, fingerprint)?;
    let mut exclusions = Vec::with_capacity(all.len());
    for &c in &all {
        let mut rest = all.clone();
        rest.remove(&c);
        let d = data.with_weak(weak_from_clusters(letter_clusters, &rest));
        let (report, _) = run_cv(format!("without cluster {c}"), &d, plan, LabelSource::Weak, variant, cfg, fingerprint)?;
        exclusions.push(Exclusion {
            cluster: c,
            letters_covered: letter_clusters.iter().filter(|&&l| l == Some(c)).count(),
            report,
        });
    }
    Ok(SensitivityReport { baseline, exclusions })
}
