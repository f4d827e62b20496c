use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use diagweak_cli::{Pipeline, PipelineConfig, Source, Stage};
use diagweak_core::embed::EmbedderProvider;
use diagweak_core::{InputVariant, LabelSource};

#[derive(Parser)]
#[command(name = "pipeline", version, about = "Weakly-supervised diagnosis identification pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Pipeline configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the global seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    embedder: Option<EmbedderArg>,
    #[arg(long)]
    embed_dim: Option<usize>,
    #[arg(long)]
    pca_dim: Option<usize>,
    /// Extraction rules (JSON), replacing the configured ones.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Abbreviation table (JSON).
    #[arg(long)]
    abbreviations: Option<PathBuf>,
    /// Disease definitions (JSON).
    #[arg(long)]
    definitions: Option<PathBuf>,
    /// Classifier input variant.
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Labels the classifier is trained on.
    #[arg(long, value_enum)]
    labels: Option<LabelsArg>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum VariantArg {
    WithDiagnosis,
    WithoutDiagnosis,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum LabelsArg {
    Weak,
    Gold,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum EmbedderArg {
    HashedNgram,
    External,
}

#[derive(Subcommand)]
enum Command {
    /// Run one stage.
    #[command(flatten)]
    Stage(StageCommand),
    /// Run every stage in order.
    All(Common),
    /// Score letters with the trained model.
    Predict {
        #[command(flatten)]
        common: Common,
        /// JSONL letters to score.
        #[arg(long)]
        input: PathBuf,
        /// Output CSV.
        #[arg(long, default_value = "predictions.csv")]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum StageCommand {
    Synth(Common),
    Extract(Common),
    Embed(Common),
    Cluster(Common),
    Keywords(Common),
    Label(Common),
    Train(Common),
    Evaluate(Common),
    Sensitivity(Common),
}

impl StageCommand {
    fn split(&self) -> (Stage, &Common) {
        match self {
            StageCommand::Synth(c) => (Stage::Synth, c),
            StageCommand::Extract(c) => (Stage::Extract, c),
            StageCommand::Embed(c) => (Stage::Embed, c),
            StageCommand::Cluster(c) => (Stage::Cluster, c),
            StageCommand::Keywords(c) => (Stage::Keywords, c),
            StageCommand::Label(c) => (Stage::Label, c),
            StageCommand::Train(c) => (Stage::Train, c),
            StageCommand::Evaluate(c) => (Stage::Evaluate, c),
            StageCommand::Sensitivity(c) => (Stage::Sensitivity, c),
        }
    }
}

fn load_config(common: &Common) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = std::env::var_os("PIPELINE_OUT") {
        cfg.output_dir = std::path::absolute(PathBuf::from(out)).context("resolving PIPELINE_OUT")?;
    }
    if let Some(e) = common.embedder {
        cfg.embedder.provider = match e {
            EmbedderArg::HashedNgram => EmbedderProvider::HashedNgram,
            EmbedderArg::External => EmbedderProvider::ExternalFile,
        };
    }
    if let Some(d) = common.embed_dim {
        cfg.embedder.dim = d;
    }
    if let Some(d) = common.pca_dim {
        cfg.pca_dim = d;
    }
    if let Some(v) = common.variant {
        cfg.variant = match v {
            VariantArg::WithDiagnosis => InputVariant::WithDiagnosis,
            VariantArg::WithoutDiagnosis => InputVariant::WithoutDiagnosis,
        };
    }
    if let Some(l) = common.labels {
        cfg.labels = match l {
            LabelsArg::Weak => LabelSource::Weak,
            LabelsArg::Gold => LabelSource::Gold,
        };
    }
    if let Some(p) = &common.rules {
        cfg.rules = Source::Path(p.clone());
    }
    if let Some(p) = &common.abbreviations {
        cfg.abbreviations = Source::Path(p.clone());
    }
    if let Some(p) = &common.definitions {
        cfg.definitions = Source::Path(p.clone());
    }
    // Flag paths are relative to the working directory; config paths are
    // already absolute.
    cfg.resolved(Path::new("."))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stage(s) => {
            let (stage, common) = s.split();
            let mut pipeline = Pipeline::new(load_config(common)?)?;
            let status = pipeline.run_stage(stage)?;
            println!("{}: {status:?}", stage.name());
        }
        Command::All(common) => {
            let mut pipeline = Pipeline::new(load_config(&common)?)?;
            let report = pipeline.run_all()?;
            print!("{}", report.to_text());
            println!("artifacts in {}", pipeline.dir().display());
        }
        Command::Predict { common, input, output } => {
            let cfg = load_config(&common)?;
            cfg.validate()?;
            let preds = diagweak_cli::predict::predict_file(&cfg, &input, &output)?;
            let positives = preds.iter().filter(|p| p.label == 1).count();
            println!("{} letters scored, {positives} predicted positive, written to {}", preds.len(), output.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
