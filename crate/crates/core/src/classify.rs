//! Letter classifier: a logistic head over letter embeddings, plus the
//! keyword baselines.
//!
//! Training minimises class-weighted binary cross-entropy with AdamW
//! (decoupled weight decay) and a linearly decaying learning rate.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Letter};
use crate::embed::{embed_text, EmbedderConfig};
use crate::error::{Error, Result};
use crate::extraction::{slice_chars, DiagnosisString, Extraction};
use crate::textnorm::{tokenize_all, TokenList};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputVariant {
    WithDiagnosis,
    WithoutDiagnosis,
}

impl InputVariant {
    pub fn name(self) -> &'static str {
        match self {
            InputVariant::WithDiagnosis => "with_diagnosis",
            InputVariant::WithoutDiagnosis => "without_diagnosis",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    /// Keep the first `max_tokens` tokens.
    #[default]
    Truncate,
    /// Score every consecutive `max_tokens` chunk and keep the maximum.
    Chunk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    Weak,
    Gold,
}

impl LabelSource {
    pub fn name(self) -> &'static str {
        match self {
            LabelSource::Weak => "weak",
            LabelSource::Gold => "gold",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassWeighting {
    None,
    #[default]
    InversePrevalence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Initial learning rate, decayed linearly to zero over all steps.
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub class_weighting: ClassWeighting,
    pub threshold: f64,
    pub max_tokens: usize,
    pub mode: InputMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            weight_decay: 0.01,
            epochs: 6,
            batch_size: 32,
            seed: 0,
            class_weighting: ClassWeighting::InversePrevalence,
            threshold: 0.5,
            max_tokens: 512,
            mode: InputMode::Truncate,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning_rate must be positive".into()));
        }
        if self.weight_decay < 0.0 {
            return Err(Error::InvalidConfig("weight_decay must be non-negative".into()));
        }
        if self.epochs == 0 || self.batch_size == 0 || self.max_tokens == 0 {
            return Err(Error::InvalidConfig("epochs, batch_size and max_tokens must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidConfig("threshold must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub dim: usize,
    pub embedder_fingerprint: String,
    pub trained_on: LabelSource,
    pub threshold: f64,
    pub train_config: TrainConfig,
    pub final_loss: f64,
}

impl ClassifierModel {
    pub fn check_fingerprint(&self, embedder: &EmbedderConfig) -> Result<()> {
        let found = embedder.fingerprint();
        if found != self.embedder_fingerprint {
            return Err(Error::FingerprintMismatch {
                expected: self.embedder_fingerprint.clone(),
                found,
            });
        }
        Ok(())
    }

    pub fn logit(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }

    pub fn predict_vector(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }

    /// Maximum probability over a letter's chunks.
    pub fn predict_chunks(&self, chunks: &[Vec<f64>]) -> f64 {
        chunks.iter().map(|c| self.predict_vector(c)).fold(0.0, f64::max)
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Stripped letter text with the diagnosis span removed when requested.
pub fn letter_text(letter: &Letter, diag: Option<&DiagnosisString>, variant: InputVariant) -> String {
    let stripped = letter.stripped_text();
    match (variant, diag) {
        (InputVariant::WithoutDiagnosis, Some(d)) => {
            let start = slice_chars(&stripped, (0, d.span.0)).len();
            let end = start + slice_chars(&stripped, d.span).len();
            debug_assert_eq!(&stripped[start..end], d.raw);
            format!("{}{}", &stripped[..start], &stripped[end..])
        }
        _ => stripped,
    }
}

/// Token chunks fed to the classifier: one truncated list, or every
/// consecutive chunk in chunk mode.
pub fn prepare_input(
    letter: &Letter,
    diag: Option<&DiagnosisString>,
    variant: InputVariant,
    mode: InputMode,
    max_tokens: usize,
) -> Vec<TokenList> {
    assert!(max_tokens >= 1, "max_tokens must be at least 1");
    let tokens = tokenize_all(&letter_text(letter, diag, variant));
    match mode {
        InputMode::Truncate => vec![tokens.truncated(max_tokens)],
        InputMode::Chunk => tokens.chunks(max_tokens),
    }
}

/// Embedded chunks of one letter. Empty chunks become zero vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LetterFeatures {
    pub letter_id: String,
    pub chunks: Vec<Vec<f64>>,
}

impl LetterFeatures {
    /// The vector used for training: the first chunk.
    pub fn training_vector(&self) -> &[f64] {
        &self.chunks[0]
    }
}

pub fn embed_chunks(chunks: &[TokenList], embedder: &EmbedderConfig) -> Result<Vec<Vec<f64>>> {
    chunks
        .iter()
        .map(|c| match embed_text(c, embedder) {
            Ok(v) => Ok(v.into_values()),
            Err(Error::Degenerate) => Ok(vec![0.0; embedder.dim]),
            Err(e) => Err(e),
        })
        .collect()
}

/// Features of every letter in corpus order.
pub fn corpus_features(
    corpus: &Corpus,
    extraction: &Extraction,
    variant: InputVariant,
    cfg: &TrainConfig,
    embedder: &EmbedderConfig,
) -> Result<Vec<LetterFeatures>> {
    embedder.validate()?;
    let diag: std::collections::HashMap<&str, &DiagnosisString> =
        extraction.diagnoses.iter().map(|d| (d.letter_id.as_str(), d)).collect();
    corpus
        .letters()
        .par_iter()
        .map(|letter| {
            let chunks = prepare_input(letter, diag.get(letter.id.as_str()).copied(), variant, cfg.mode, cfg.max_tokens);
            Ok(LetterFeatures {
                letter_id: letter.id.clone(),
                chunks: embed_chunks(&chunks, embedder)?,
            })
        })
        .collect()
}

/// Mean weighted logistic loss over a batch and its gradient with respect
/// to the weights and bias.
pub fn loss_and_gradient(
    weights: &[f64],
    bias: f64,
    xs: &[&[f64]],
    ys: &[bool],
    sample_weights: &[f64],
) -> (f64, Vec<f64>, f64) {
    let n = xs.len().max(1) as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for ((x, &y), &sw) in xs.iter().zip(ys).zip(sample_weights) {
        let z = dot(weights, x) + bias;
        // -[y log σ(z) + (1-y) log(1-σ(z))] = softplus(z) - y z
        let target = if y { 1.0 } else { 0.0 };
        loss += sw * (softplus(z) - target * z);
        let r = sw * (sigmoid(z) - target);
        for (g, xi) in grad.iter_mut().zip(x.iter()) {
            *g += r * xi;
        }
        grad_b += r;
    }
    grad.iter_mut().for_each(|g| *g /= n);
    (loss / n, grad, grad_b / n)
}

fn class_weights(labels: &[bool], weighting: ClassWeighting) -> (f64, f64) {
    match weighting {
        ClassWeighting::None => (1.0, 1.0),
        ClassWeighting::InversePrevalence => {
            let n = labels.len() as f64;
            let pos = labels.iter().filter(|&&y| y).count() as f64;
            (n / (2.0 * pos), n / (2.0 * (n - pos)))
        }
    }
}

/// Adam with decoupled weight decay and a learning rate decaying linearly
/// from its initial value to zero over `total_steps`.
#[derive(Debug, Clone)]
pub struct AdamW {
    lr0: f64,
    weight_decay: f64,
    total_steps: usize,
    step: usize,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamW {
    pub fn new(n_params: usize, lr0: f64, weight_decay: f64, total_steps: usize) -> Self {
        AdamW {
            lr0,
            weight_decay,
            total_steps: total_steps.max(1),
            step: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
        }
    }

    /// Learning rate applied at the next step.
    pub fn current_lr(&self) -> f64 {
        self.lr0 * (1.0 - self.step as f64 / self.total_steps as f64)
    }

    /// Update `params` in place; parameters from index `decay_until` on are
    /// not decayed.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], decay_until: usize) {
        let lr = self.current_lr();
        self.step += 1;
        let c1 = 1.0 - BETA1.powi(self.step as i32);
        let c2 = 1.0 - BETA2.powi(self.step as i32);
        for (j, (p, &g)) in params.iter_mut().zip(grads).enumerate() {
            self.m[j] = BETA1 * self.m[j] + (1.0 - BETA1) * g;
            self.v[j] = BETA2 * self.v[j] + (1.0 - BETA2) * g * g;
            if j < decay_until {
                *p *= 1.0 - lr * self.weight_decay;
            }
            *p -= lr * (self.m[j] / c1) / ((self.v[j] / c2).sqrt() + ADAM_EPS);
        }
    }
}

/// Train the logistic head on precomputed vectors.
pub fn train_classifier(
    xs: &[&[f64]],
    labels: &[bool],
    cfg: &TrainConfig,
    embedder_fingerprint: &str,
    trained_on: LabelSource,
) -> Result<ClassifierModel> {
    cfg.validate()?;
    if xs.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: labels.len(),
        });
    }
    let pos = labels.iter().filter(|&&y| y).count();
    if pos == 0 || pos == labels.len() {
        return Err(Error::SingleClass);
    }
    let dim = xs[0].len();
    if let Some(x) = xs.iter().find(|x| x.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: x.len(),
        });
    }
    let (w_pos, w_neg) = class_weights(labels, cfg.class_weighting);

    let n = xs.len();
    let steps_per_epoch = n.div_ceil(cfg.batch_size);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    // Weights followed by the bias, which is not decayed.
    let mut params = vec![0.0; dim + 1];
    let mut opt = AdamW::new(dim + 1, cfg.learning_rate, cfg.weight_decay, steps_per_epoch * cfg.epochs);
    let mut final_loss = f64::NAN;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let bx: Vec<&[f64]> = batch.iter().map(|&i| xs[i]).collect();
            let by: Vec<bool> = batch.iter().map(|&i| labels[i]).collect();
            let bw: Vec<f64> = by.iter().map(|&y| if y { w_pos } else { w_neg }).collect();
            let (loss, mut grad, grad_b) = loss_and_gradient(&params[..dim], params[dim], &bx, &by, &bw);
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            epoch_loss += loss * batch.len() as f64;
            grad.push(grad_b);
            opt.step(&mut params, &grad, dim);
        }
        final_loss = epoch_loss / n as f64;
        if !final_loss.is_finite() || params.iter().any(|w| !w.is_finite()) {
            return Err(Error::Diverged { epoch });
        }
        log::debug!("epoch {epoch}: loss {final_loss:.6}");
    }
    let bias = params.pop().expect("bias slot");
    let weights = params;

    Ok(ClassifierModel {
        weights,
        bias,
        dim,
        embedder_fingerprint: embedder_fingerprint.to_string(),
        trained_on,
        threshold: cfg.threshold,
        train_config: cfg.clone(),
        final_loss,
    })
}

/// Train directly from a corpus.
pub fn train_on_corpus(
    corpus: &Corpus,
    extraction: &Extraction,
    labels: &[bool],
    variant: InputVariant,
    cfg: &TrainConfig,
    embedder: &EmbedderConfig,
    trained_on: LabelSource,
) -> Result<ClassifierModel> {
    let features = corpus_features(corpus, extraction, variant, cfg, embedder)?;
    let xs: Vec<&[f64]> = features.iter().map(LetterFeatures::training_vector).collect();
    train_classifier(&xs, labels, cfg, &embedder.fingerprint(), trained_on)
}

/// Probability that a letter mentions the disease.
pub fn predict_proba(
    model: &ClassifierModel,
    letter: &Letter,
    diag: Option<&DiagnosisString>,
    variant: InputVariant,
    embedder: &EmbedderConfig,
) -> Result<f64> {
    model.check_fingerprint(embedder)?;
    let cfg = &model.train_config;
    let chunks = prepare_input(letter, diag, variant, cfg.mode, cfg.max_tokens);
    Ok(model.predict_chunks(&embed_chunks(&chunks, embedder)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleScope {
    FullText,
    DiagnosisOnly,
}

/// Whole-token search for `term` in the stripped letter or in the trimmed
/// diagnosis string.
pub fn rule_classify(letter: &Letter, diag: Option<&DiagnosisString>, scope: RuleScope, term: &str) -> bool {
    match scope {
        RuleScope::FullText => tokenize_all(&letter.stripped_text()).contains(term),
        RuleScope::DiagnosisOnly => diag.is_some_and(|d| tokenize_all(&d.trimmed).contains(term)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::{extract_diagnosis, trim_diagnosis, ExtractionRules};
    use proptest::prelude::*;
    use rand::Rng;

    fn letter(text: &str) -> Letter {
        Letter::new("A", "H", "L", None, text, None).unwrap()
    }

    fn diag_of(l: &Letter) -> Option<DiagnosisString> {
        let rules = ExtractionRules::default().compile().unwrap();
        let raw = extract_diagnosis(&l.stripped_text(), &rules)?;
        Some(DiagnosisString {
            letter_id: l.id.clone(),
            trimmed: trim_diagnosis(&raw.raw, &rules)?,
            raw: raw.raw,
            span: raw.span,
        })
    }

    fn cfg() -> TrainConfig {
        TrainConfig::default()
    }

    #[test]
    fn truncation_and_chunking() {
        let text = vec!["parola"; 600].join(" ");
        let l = letter(&text);
        let t = prepare_input(&l, None, InputVariant::WithDiagnosis, InputMode::Truncate, 512);
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].len(), 512);
        let l = letter(&vec!["parola"; 1030].join(" "));
        let c = prepare_input(&l, None, InputVariant::WithDiagnosis, InputMode::Chunk, 512);
        assert_eq!(c.iter().map(TokenList::len).collect::<Vec<_>>(), [512, 512, 6]);
    }

    #[test]
    fn without_diagnosis_removes_span() {
        let l = letter("Egregio Collega,\nDiagnosi: febbre\nDecorso regolare.");
        let d = diag_of(&l).unwrap();
        let with = prepare_input(&l, Some(&d), InputVariant::WithDiagnosis, InputMode::Truncate, 512);
        let without = prepare_input(&l, Some(&d), InputVariant::WithoutDiagnosis, InputMode::Truncate, 512);
        assert!(with[0].contains("febbre"));
        assert!(!without[0].contains("febbre"));
        assert!(without[0].contains("diagnosi"));
    }

    #[test]
    fn zero_model_predicts_half() {
        let model = ClassifierModel {
            weights: vec![0.0; 8],
            bias: 0.0,
            dim: 8,
            embedder_fingerprint: String::new(),
            trained_on: LabelSource::Weak,
            threshold: 0.5,
            train_config: cfg(),
            final_loss: 0.0,
        };
        assert_eq!(model.predict_vector(&[1.0; 8]), 0.5);
        assert_eq!(model.predict_chunks(&[vec![0.0; 8]]), 0.5);
    }

    #[test]
    fn max_over_chunks() {
        let model = ClassifierModel {
            weights: vec![1.0],
            bias: 0.0,
            dim: 1,
            embedder_fingerprint: String::new(),
            trained_on: LabelSource::Weak,
            threshold: 0.5,
            train_config: cfg(),
            final_loss: 0.0,
        };
        let logit = |p: f64| (p / (1.0 - p)).ln();
        let p = model.predict_chunks(&[vec![logit(0.3)], vec![logit(0.9)]]);
        assert!((p - 0.9).abs() < 1e-12);
    }

    #[test]
    fn fingerprint_mismatch() {
        let l = letter("Diagnosi: febbre");
        let embedder = EmbedderConfig::default();
        let xs = [vec![1.0; 8], vec![-1.0; 8]];
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let model = train_classifier(&refs, &[true, false], &cfg(), "other", LabelSource::Gold).unwrap();
        assert!(matches!(
            predict_proba(&model, &l, None, InputVariant::WithDiagnosis, &embedder),
            Err(Error::FingerprintMismatch { .. })
        ));
    }

    #[test]
    fn single_class_rejected() {
        let xs = [vec![1.0; 4], vec![2.0; 4]];
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        assert!(matches!(train_classifier(&refs, &[true, true], &cfg(), "f", LabelSource::Weak), Err(Error::SingleClass)));
    }

    #[test]
    fn divergence_names_epoch() {
        let xs = [vec![f64::MAX; 2], vec![-f64::MAX; 2]];
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let c = TrainConfig { learning_rate: 1e300, ..cfg() };
        assert!(matches!(train_classifier(&refs, &[true, false], &c, "f", LabelSource::Weak), Err(Error::Diverged { epoch: 1 })));
    }

    fn separable_toy() -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..20 {
            let y = i % 2 == 0;
            let offset = if y { 1.0 } else { -1.0 };
            xs.push(vec![offset + rng.random_range(-0.5..0.5), rng.random_range(-1.0..1.0)]);
            ys.push(y);
        }
        (xs, ys)
    }

    #[test]
    fn separable_toy_is_learned() {
        let (xs, ys) = separable_toy();
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let c = TrainConfig {
            learning_rate: 0.1,
            epochs: 50,
            batch_size: 4,
            ..cfg()
        };
        let model = train_classifier(&refs, &ys, &c, "f", LabelSource::Gold).unwrap();
        let correct = xs.iter().zip(&ys).filter(|(x, &y)| (model.predict_vector(x) >= 0.5) == y).count();
        assert_eq!(correct, 20);
        let again = train_classifier(&refs, &ys, &c, "f", LabelSource::Gold).unwrap();
        assert_eq!(model, again);
    }

    #[test]
    fn zero_gradient_shrinks_geometrically() {
        let mut opt = AdamW::new(3, 0.5, 0.1, 4);
        let mut params = vec![1.0, -2.0, 3.0];
        for _ in 0..4 {
            let lr = opt.current_lr();
            let before = params.clone();
            opt.step(&mut params, &[0.0; 3], 2);
            assert_eq!(params[0], before[0] * (1.0 - lr * 0.1));
            assert_eq!(params[1], before[1] * (1.0 - lr * 0.1));
            assert_eq!(params[2], 3.0);
        }
        assert_eq!(opt.current_lr(), 0.0);
    }

    #[test]
    fn rule_baselines() {
        let l = letter("Diagnosi: otite\nDecorso clinico: riscontro di bronchiolite in fase iniziale.");
        let d = diag_of(&l);
        assert!(rule_classify(&l, d.as_ref(), RuleScope::FullText, "bronchiolite"));
        assert!(!rule_classify(&l, d.as_ref(), RuleScope::DiagnosisOnly, "bronchiolite"));
        assert!(!rule_classify(&l, None, RuleScope::DiagnosisOnly, "bronchiolite"));
        let b = letter("Diagnosi: Bronchiolite acuta");
        assert!(rule_classify(&b, diag_of(&b).as_ref(), RuleScope::DiagnosisOnly, "bronchiolite"));
    }

    proptest! {
        #[test]
        fn probabilities_strictly_inside(z in -30.0f64..30.0) {
            let p = sigmoid(z);
            prop_assert!(p > 0.0 && p < 1.0);
        }

        #[test]
        fn gradient_matches_finite_differences(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dim = 5;
            let w: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b: f64 = rng.random_range(-1.0..1.0);
            let xs: Vec<Vec<f64>> = (0..6).map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
            let ys: Vec<bool> = (0..6).map(|i| i % 3 == 0).collect();
            let sw: Vec<f64> = ys.iter().map(|&y| if y { 2.5 } else { 0.7 }).collect();
            let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
            let (_, g, gb) = loss_and_gradient(&w, b, &refs, &ys, &sw);
            let h = 1e-5;
            for j in 0..=dim {
                let eval = |delta: f64| {
                    let mut w2 = w.clone();
                    let mut b2 = b;
                    if j < dim { w2[j] += delta } else { b2 += delta }
                    loss_and_gradient(&w2, b2, &refs, &ys, &sw).0
                };
                let numeric = (eval(h) - eval(-h)) / (2.0 * h);
                let analytic = if j < dim { g[j] } else { gb };
                let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-8);
                prop_assert!(rel <= 1e-4, "component {j}: {analytic} vs {numeric}");
            }
        }
    }
}
