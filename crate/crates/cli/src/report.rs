//! Evaluation and sensitivity reports: JSON documents and their text tables.

use std::fmt::Write as _;

use diagweak_core::eval::{GroupBy, LogoReport, MeanStd, MetricSummary, SensitivityReport, SubgroupReport};
use diagweak_core::{EvalReport, LabelSource};
use serde::{Deserialize, Serialize};

pub const STD_NOTE: &str = "Values in percent. Std. dev. (sample, over folds) in parentheses. W = weak labels, G = gold labels.";

/// Leave-one-group-out result, or why it could not run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogoOutcome {
    pub group_by: GroupBy,
    pub report: Option<LogoReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub n_letters: usize,
    pub weak_positives: usize,
    /// `None` when some letter has no gold label.
    pub gold_positives: Option<usize>,
    pub k: usize,
    pub stratified_on: LabelSource,
    /// Name of the row trained as configured.
    pub primary: String,
    pub rows: Vec<EvalReport>,
    /// Pediatric split of the primary row.
    pub subgroups: SubgroupReport,
    pub logo: Vec<LogoOutcome>,
}

impl EvaluationReport {
    pub fn row(&self, name: &str) -> Option<&EvalReport> {
        self.rows.iter().find(|r| r.name == name)
    }
}

pub fn row_name(source: LabelSource, variant: diagweak_core::InputVariant) -> String {
    format!("{}/{}", source.name(), variant.name())
}

fn cell(m: Option<&MeanStd>) -> String {
    match m {
        Some(m) => format!("{:.2} ({:.2})", 100.0 * m.mean, 100.0 * m.std),
        None => "-".into(),
    }
}

fn block(s: Option<&MetricSummary>) -> [String; 4] {
    match s {
        Some(s) => [cell(Some(&s.precision)), cell(Some(&s.recall)), cell(Some(&s.f1)), cell(s.auc.as_ref())],
        None => std::array::from_fn(|_| "-".into()),
    }
}

fn metrics_table(out: &mut String, first: &str, rows: &[(String, &EvalReport)]) {
    let header = [first, "P-W", "R-W", "F1-W", "AUC-W", "P-G", "R-G", "F1-G", "AUC-G"];
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(label, r)| {
            let mut line = vec![label.clone()];
            line.extend(block(r.weak.as_ref()));
            line.extend(block(r.gold.as_ref()));
            line
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|c| body.iter().map(|l| l[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let line = |cols: Vec<&str>| -> String {
        cols.iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let _ = writeln!(out, "{}", line(header.to_vec()));
    for l in &body {
        let _ = writeln!(out, "{}", line(l.iter().map(String::as_str).collect()));
    }
    for (label, r) in rows {
        let skipped = r.skipped_folds();
        if !skipped.is_empty() {
            let _ = writeln!(out, "note: {label}: folds {skipped:?} lack positives or were skipped");
        }
    }
}

impl EvaluationReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Classification results, {}-fold stratified cross-validation", self.k);
        let _ = writeln!(out, "{STD_NOTE}");
        let _ = writeln!(
            out,
            "letters {}, weak positives {}, gold positives {}, folds stratified on {} labels",
            self.n_letters,
            self.weak_positives,
            self.gold_positives.map_or("-".into(), |g| g.to_string()),
            self.stratified_on.name()
        );
        let _ = writeln!(out, "primary model: {}", self.primary);
        let _ = writeln!(out);
        let rows: Vec<(String, &EvalReport)> = self.rows.iter().map(|r| (r.name.clone(), r)).collect();
        metrics_table(&mut out, "Model", &rows);

        let _ = writeln!(out);
        let _ = writeln!(out, "Pediatric subgroups of {}", self.primary);
        metrics_table(
            &mut out,
            "Subgroup",
            &[
                ("pediatric".into(), &self.subgroups.pediatric),
                ("non_pediatric".into(), &self.subgroups.non_pediatric),
            ],
        );

        for logo in &self.logo {
            let by = match logo.group_by {
                GroupBy::Hospital => "hospital",
                GroupBy::Lhu => "LHU",
            };
            let _ = writeln!(out);
            let _ = writeln!(out, "Leave one {by} out ({})", self.primary);
            match (&logo.report, &logo.error) {
                (Some(r), _) => {
                    let _ = writeln!(
                        out,
                        "{:<12}  {:>7}  {:>9}  {:>6}  {:>6}  {:>6}  {:>6}",
                        "Group", "letters", "positives", "P-G", "R-G", "F1-G", "AUC-G"
                    );
                    for g in &r.groups {
                        let m = g.gold.as_ref().or(g.weak.as_ref());
                        let f = |v: Option<f64>| v.map_or("-".into(), |v| format!("{:.2}", 100.0 * v));
                        let _ = writeln!(
                            out,
                            "{:<12}  {:>7}  {:>9}  {:>6}  {:>6}  {:>6}  {:>6}",
                            g.group,
                            g.n_letters,
                            g.positives,
                            f(m.map(|m| m.precision)),
                            f(m.map(|m| m.recall)),
                            f(m.map(|m| m.f1)),
                            f(m.and_then(|m| m.auc)),
                        );
                    }
                    if !r.excluded.is_empty() {
                        let names: Vec<String> = r.excluded.iter().map(|(g, c)| format!("{g} ({c})")).collect();
                        let _ = writeln!(
                            out,
                            "excluded, fewer than {} {} positives: {}",
                            r.min_positives,
                            r.counted_on.name(),
                            names.join(", ")
                        );
                    }
                }
                (None, Some(e)) => {
                    let _ = writeln!(out, "not run: {e}");
                }
                (None, None) => {}
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedCluster {
    pub cluster: usize,
    pub keywords: Vec<String>,
    pub letters_covered: usize,
    /// Baseline gold F1 minus gold F1 without the cluster.
    pub gold_f1_drop: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityDocument {
    pub clusters: Vec<ExcludedCluster>,
    pub analysis: SensitivityReport,
}

impl SensitivityDocument {
    pub fn new(analysis: SensitivityReport, keywords: impl Fn(usize) -> Vec<String>) -> Self {
        let base = analysis.baseline.gold_f1();
        let clusters = analysis
            .exclusions
            .iter()
            .map(|e| ExcludedCluster {
                cluster: e.cluster,
                keywords: keywords(e.cluster),
                letters_covered: e.letters_covered,
                gold_f1_drop: base.zip(e.report.gold_f1()).map(|(b, f)| b - f),
            })
            .collect();
        SensitivityDocument { clusters, analysis }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Sensitivity to single first-level cluster exclusion");
        let _ = writeln!(out, "{STD_NOTE}");
        let _ = writeln!(out);
        for c in &self.clusters {
            let _ = writeln!(
                out,
                "cluster {}: {} letters, keywords [{}], gold F1 drop {}",
                c.cluster,
                c.letters_covered,
                c.keywords.join(" "),
                c.gold_f1_drop.map_or("-".into(), |d| format!("{:.2}", 100.0 * d))
            );
        }
        let _ = writeln!(out);
        let mut rows = vec![("all selected".to_string(), &self.analysis.baseline)];
        rows.extend(self.analysis.exclusions.iter().map(|e| (format!("without #{}", e.cluster), &e.report)));
        metrics_table(&mut out, "Weak labels from", &rows);
        out
    }
}
