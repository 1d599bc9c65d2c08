//! Argument definitions for the `intergroup-lens` subcommands.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "intergroup-lens",
    version,
    about = "Pipeline for interpersonal group relationship and emotion analysis",
    long_about = "Runs the pipeline stages: synth -> ingest -> aggregate -> agreement -> \
                  train -> evaluate -> analyze. All stages are deterministic given their \
                  inputs and --seed."
)]
pub struct Cli {
    /// Root random seed (flags > config file > default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Flat key=value config file supplying defaults for omitted flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads for bootstrap resampling and training restarts.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus with planted signal.
    Synth(SynthArgs),
    /// Filter raw tweets into masked interpersonal utterances.
    Ingest(IngestArgs),
    /// Aggregate annotations and split into train/dev/test.
    Aggregate(AggregateArgs),
    /// Compute annotator agreement metrics.
    Agreement(AgreementArgs),
    /// Train a classifier.
    Train(Box<TrainArgs>),
    /// Evaluate a trained model, optionally against a baseline.
    Evaluate(EvaluateArgs),
    /// Produce descriptive analysis reports.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of tweets to generate.
    #[arg(long)]
    pub n: Option<usize>,
    /// Output directory for members.tsv, tweets.jsonl, annotations.jsonl, gold.jsonl.
    #[arg(long)]
    pub out: PathBuf,
    /// Probability of planting the out-group cue token.
    #[arg(long)]
    pub cue_prob: Option<f64>,
    /// Junk-token insertion rate.
    #[arg(long)]
    pub noise_rate: Option<f64>,
    /// Per-label annotator flip rate.
    #[arg(long)]
    pub flip_rate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Tweet corpus (JSON lines).
    #[arg(long)]
    pub tweets: PathBuf,
    /// Member directory (TSV).
    #[arg(long)]
    pub members: PathBuf,
    /// Output utterances file (JSON lines).
    #[arg(long)]
    pub out: PathBuf,
    /// Balanced per-year sample size; omit to keep every utterance.
    #[arg(long)]
    pub per_year: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// Annotation records (JSON lines).
    #[arg(long)]
    pub annotations: PathBuf,
    /// Utterances produced by ingest (JSON lines).
    #[arg(long)]
    pub utterances: PathBuf,
    /// Output directory for train.jsonl, dev.jsonl, test.jsonl, counts.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AgreementMode {
    Best,
    Worst,
    All,
}

#[derive(Debug, Args)]
pub struct AgreementArgs {
    /// Annotation records (JSON lines).
    #[arg(long)]
    pub annotations: PathBuf,
    /// Which PEA variant(s) to report.
    #[arg(long, value_enum, default_value = "all")]
    pub mode: AgreementMode,
    /// Output report path (JSON).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Igr,
    Emotion,
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelFamily {
    Majority,
    Sentrule,
    Emolex,
    Nbsvm,
    Mlp,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Prediction task.
    #[arg(long, value_enum)]
    pub task: TaskArg,
    /// Model family.
    #[arg(long, value_enum)]
    pub model: ModelFamily,
    /// Training examples (JSON lines).
    #[arg(long)]
    pub train: PathBuf,
    /// Development examples (JSON lines).
    #[arg(long)]
    pub dev: PathBuf,
    /// Output model file.
    #[arg(long)]
    pub out: PathBuf,
    /// Random restarts (mlp only; others are deterministic).
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Binarize n-gram counts (default true).
    #[arg(long)]
    pub binarize: Option<bool>,
    /// Optional stopword list (one word per line) removed before vectorizing.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Emotion lexicon TSV for the emolex model (default: bundled).
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Sentiment lexicon TSV for the sentrule model (default: bundled).
    #[arg(long)]
    pub sentiment_lexicon: Option<PathBuf>,
    /// Decision threshold for the emolex model.
    #[arg(long)]
    pub emolex_threshold: Option<f64>,
    #[arg(long)]
    pub vocab_max_size: Option<usize>,
    #[arg(long)]
    pub vocab_min_count: Option<usize>,
    /// NB log-count ratio smoothing.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub lr_head: Option<f64>,
    #[arg(long)]
    pub lr_encoder: Option<f64>,
    #[arg(long)]
    pub dropout: Option<f64>,
    #[arg(long)]
    pub hidden_dim: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Trained model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Test examples (JSON lines).
    #[arg(long)]
    pub test: PathBuf,
    /// Baseline model to compare against with a paired bootstrap.
    #[arg(long)]
    pub compare: Option<PathBuf>,
    /// Bootstrap resamples (minimum 1000).
    #[arg(long)]
    pub bootstrap: Option<usize>,
    /// Use the shifted-delta bootstrap variant instead of the default count.
    #[arg(long, default_value_t = false)]
    pub shift_bootstrap: bool,
    /// Output report path (JSON).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Labeled examples (JSON lines): a split file or generator gold.
    #[arg(long)]
    pub data: PathBuf,
    /// Optional nbsvm model file for top-feature extraction.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Top-k handles for target concentration.
    #[arg(long)]
    pub topk: Option<usize>,
    /// Number of top features per class.
    #[arg(long)]
    pub top_features: Option<usize>,
    /// Output directory for report.json, report.md, and CSVs.
    #[arg(long)]
    pub out: PathBuf,
}
