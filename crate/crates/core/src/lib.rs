//! Weakly-supervised diagnosis identification from semi-structured discharge
//! letters.
//!
//! The crate is organised as the pipeline runs:
//!
//! 1. [`corpus`]: letters, JSONL ingestion, boilerplate stripping, pediatric
//!    detection and a synthetic corpus generator.
//! 2. [`extraction`]: locate and trim the diagnosis sentence of each letter.
//! 3. [`textnorm`]: normalisation and tokenisation.
//! 4. [`embed`]: hashed n-gram embeddings, external vectors and PCA.
//! 5. [`hdbscan`]: density-based clustering of the reduced vectors.
//! 6. [`keywords`]: keyword-contrast cluster summaries and second-level merging.
//! 7. [`weaklabel`]: keyword definitions mapping clusters to weak labels.
//! 8. [`classify`]: the linear letter classifier and rule-based baselines.
//! 9. [`eval`]: metrics, stratified CV, leave-one-group-out, subgroups and
//!    cluster-exclusion sensitivity.

pub mod classify;
pub mod corpus;
pub mod embed;
pub mod error;
pub mod eval;
pub mod extraction;
pub mod hdbscan;
pub mod keywords;
pub mod textnorm;
pub mod weaklabel;

pub use classify::{ClassifierModel, InputMode, InputVariant, LabelSource, TrainConfig};
pub use corpus::{Corpus, Letter, Provenance, SynthesisConfig};
pub use embed::{EmbedderConfig, EmbeddingVector, PcaModel};
pub use error::{Error, Result};
pub use eval::{EvalReport, FoldPlan, Metrics};
pub use extraction::{DiagnosisString, ExtractionRules};
pub use hdbscan::{ClusterAssignment, ClusterSelection, CondensedTree, HdbscanParams};
pub use keywords::{ClusterSummary, KeywordParams, Level2Params};
pub use textnorm::{AbbreviationTable, TokenList};
pub use weaklabel::{DiseaseDefinition, WeakLabelSet};
