//! Stage-by-stage runner for the weak-labelling pipeline: configuration,
//! artifacts persisted between stages and a checksummed run manifest.

pub mod artifacts;
pub mod config;
pub mod manifest;
pub mod pipeline;
pub mod predict;
pub mod report;

pub use config::{CorpusSource, EvalSettings, PipelineConfig, Source};
pub use manifest::{RunManifest, StageRecord, StageStatus};
pub use pipeline::{stage_seed, Pipeline, Stage};
pub use report::{EvaluationReport, SensitivityDocument};
