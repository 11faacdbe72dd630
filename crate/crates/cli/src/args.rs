use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "capkit",
    version,
    about = "Audit caption metrics, augment captioned audio, analyse vocabulary imbalance"
)]
pub struct Cli {
    /// Worker threads (default: number of processors).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a Clotho or AudioCaps CSV (or re-validate a manifest) into a manifest.
    Ingest(IngestArgs),
    /// Word counts, priors and cumulative coverage.
    Vocab(VocabArgs),
    /// Sample type-1/type-2 perturbation pairs.
    Perturb(PerturbArgs),
    /// Score perturbation pairs or hypothesis/reference files.
    Score(ScoreArgs),
    /// Percentage of pairs where a metric ranks type-1 above type-2.
    Suitability(SuitabilityArgs),
    /// Build concatenated or mixed audio-caption pairs.
    Augment(AugmentArgs),
    /// Vocabulary-balanced cross-entropy weights.
    LossWeights(LossWeightsArgs),
    /// Cross-entropy and focal loss over a grid of target probabilities.
    LossEval(LossEvalArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Clotho,
    Audiocaps,
    Manifest,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long, value_enum)]
    pub format: Format,
    /// Input CSV, or the manifest for `--format manifest`.
    #[arg(long)]
    pub csv: PathBuf,
    /// Directory holding the audio files (CSV formats only).
    #[arg(long)]
    pub audio_dir: Option<PathBuf>,
    /// Drop clips with a caption longer than this many words.
    #[arg(long)]
    pub max_words: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("vocab_input").required(true).args(["manifest", "captions"])))]
pub struct VocabArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Plain-text captions, one per line (for example model outputs).
    #[arg(long)]
    pub captions: Option<PathBuf>,
    #[arg(long)]
    pub out_csv: PathBuf,
    /// Optional cumulative-coverage plot.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// semantic, temporal, spatial, a comma list of them, or `all`.
    #[arg(long)]
    pub kind: String,
    /// Pairs per kind.
    #[arg(long, default_value_t = capkit::perturb::DEFAULT_SAMPLE_SIZE)]
    pub n: usize,
    /// Verb list, one word per line (default: bundled list).
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BackendArgs {
    /// Comma-separated: bleu4, rougel, meteor, ciderd, fense_star, fense.
    #[arg(long)]
    pub metrics: String,
    /// `lexical` or `remote:URL`.
    #[arg(long, default_value = "lexical")]
    pub backend: String,
    /// Remote request timeout in seconds.
    #[arg(long, default_value_t = 30)]
    pub timeout_s: u64,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("score_input").required(true).args(["pairs", "hyp"])))]
pub struct ScoreArgs {
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Hypotheses, one per line; needs `--refs`.
    #[arg(long, requires = "refs")]
    pub hyp: Option<PathBuf>,
    /// References, one JSON string array per line.
    #[arg(long, requires = "hyp")]
    pub refs: Option<PathBuf>,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum References {
    /// The unperturbed caption only.
    Original,
    /// Every caption of the source clip (needs `--manifest`).
    Clip,
}

#[derive(Debug, Args)]
pub struct SuitabilityArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[arg(long, value_enum, default_value = "original")]
    pub references: References,
    /// Source corpus for `--references clip`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub out_csv: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Concat,
    Mixing,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Clotho-style manifest.
    #[arg(long)]
    pub clotho: PathBuf,
    /// AudioCaps-style manifest; clips with captions over eight words are skipped.
    #[arg(long)]
    pub audiocaps: PathBuf,
    #[arg(long)]
    pub count: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Mixing caption template for equal weights.
    #[arg(long)]
    pub template_equal: Option<String>,
    /// Mixing caption template when the Clotho clip is louder.
    #[arg(long)]
    pub template_primary_louder: Option<String>,
    /// Mixing caption template when the AudioCaps clip is louder.
    #[arg(long)]
    pub template_secondary_louder: Option<String>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("weights_input").required(true).args(["counts", "manifest"])))]
pub struct LossWeightsArgs {
    /// `token,count` CSV.
    #[arg(long)]
    pub counts: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, default_value_t = capkit::lossfn::DEFAULT_MAX_WEIGHT)]
    pub max_weight: f64,
    #[arg(long)]
    pub out_csv: PathBuf,
}

#[derive(Debug, Args)]
pub struct LossEvalArgs {
    /// Comma-separated focusing parameters.
    #[arg(long, default_value = "0,1,2,5,10")]
    pub gamma_list: String,
    /// `start:end:count` (inclusive) or a comma-separated list.
    #[arg(long, default_value = "0.01:0.99:99")]
    pub alpha_grid: String,
    #[arg(long)]
    pub out_csv: PathBuf,
}
