//! Score new letters with a trained model.

use std::path::Path;

use anyhow::{Context, Result};
use diagweak_core::classify::predict_proba;
use diagweak_core::extraction::extract_all;
use diagweak_core::{ClassifierModel, Corpus};
use serde::Serialize;

use crate::artifacts::write_csv;
use crate::manifest::read_json;
use crate::PipelineConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub letter_id: String,
    pub probability: f64,
    pub label: u8,
}

/// Score every letter of `input` with the model of the `train` stage and
/// write `letter_id,probability,label` rows to `output`.
pub fn predict_file(cfg: &PipelineConfig, input: &Path, output: &Path) -> Result<Vec<Prediction>> {
    let model_path = cfg.output_dir.join("model.json");
    let model: ClassifierModel =
        read_json(&model_path).with_context(|| "no trained model; run stage `train` first".to_string())?;
    let corpus = Corpus::load(input)?;
    let ex = extract_all(&corpus, cfg.rules())?;
    let predictions = corpus
        .iter()
        .map(|l| {
            let probability = predict_proba(&model, l, ex.get(&l.id), cfg.variant, &cfg.embedder)?;
            Ok(Prediction {
                letter_id: l.id.clone(),
                probability,
                label: u8::from(probability >= model.threshold),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_csv(output, &predictions)?;
    Ok(predictions)
}
