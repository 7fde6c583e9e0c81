use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;
mod run;

#[derive(Parser, Debug)]
#[command(
    name = "movoc",
    version,
    about = "Morpheme-aware subword tokenization toolkit"
)]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Global {
    /// Normalization policy JSON file
    #[arg(long, global = true)]
    pub policy: Option<PathBuf>,

    /// Seed for commands that sample
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Emit JSON instead of text
    #[arg(long, global = true)]
    pub json: bool,

    /// Output path (stdout when omitted, where allowed)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Normalize text line by line
    Normalize(InputArgs),
    /// Split normalized text into word and punctuation pre-tokens
    Pretokenize(InputArgs),
    /// Train a plain BPE model up to a vocabulary size
    TrainBpe(TrainBpeArgs),
    /// Rank morphs of a segmented corpus by frequency
    ExtractMorphemes(ExtractArgs),
    /// Build a hybrid vocabulary from per-language corpora
    BuildVocab(BuildVocabArgs),
    /// Train a tokenizer model
    Train(TrainArgs),
    /// Encode text with a model
    Encode(EncodeArgs),
    /// Decode id lines produced by `encode --ids`
    Decode(DecodeArgs),
    /// Score a model against gold segmentations
    Eval(EvalArgs),
    /// Score two models side by side
    Compare(CompareArgs),
    /// Run vocabulary construction and training from a JSON config
    Pipeline(PipelineArgs),
    /// Generate a synthetic segmented corpus
    GenSynthetic(GenArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct InputArgs {
    /// Input file; stdin when omitted or `-`
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainBpeArgs {
    /// Plain-text corpus
    #[arg(long)]
    pub corpus: PathBuf,
    /// Target vocabulary size, seed characters included
    #[arg(long)]
    pub size: usize,
    #[arg(long)]
    pub lang: Option<String>,
    /// Marker appended to word-final symbols, e.g. `</w>`
    #[arg(long)]
    pub end_of_word: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct ExtractArgs {
    /// Gold TSV or role-annotation JSONL
    #[arg(long)]
    pub segmented: PathBuf,
    /// Number of morphemes to keep
    #[arg(long)]
    pub k: usize,
    /// Plain corpus whose word frequencies weight the annotations
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long, default_value = "")]
    pub lang: String,
}

#[derive(Args, Debug, Serialize)]
pub struct BuildVocabArgs {
    /// Total vocabulary budget
    #[arg(long)]
    pub size: usize,
    /// Morpheme proportion in [0, 1]
    #[arg(long)]
    pub ratio: f64,
    /// `tag=plain.txt:segmented.tsv`, repeated per language
    #[arg(long = "lang", required = true)]
    pub langs: Vec<String>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainMode {
    Movoc,
    Bpe,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    #[arg(long, value_enum, default_value_t = TrainMode::Movoc)]
    pub mode: TrainMode,
    /// Plain-text corpus; word counts come from the gold file when omitted
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Gold segmentations supplying morpheme boundaries
    #[arg(long)]
    pub segmented: Option<PathBuf>,
    /// Maximum number of merges
    #[arg(long)]
    pub merges: usize,
    /// Vocabulary artifact from `build-vocab`; restricts merges to it
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long, default_value = "")]
    pub lang: String,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FallbackArg {
    Unk,
    CharPassthrough,
}

#[derive(Args, Debug, Serialize)]
pub struct EncodeArgs {
    #[arg(long)]
    pub model: PathBuf,
    pub input: Option<PathBuf>,
    /// Token ids: comma-separated within a pre-token, space between
    #[arg(long, group = "view")]
    pub ids: bool,
    /// Token strings separated by spaces (default)
    #[arg(long, group = "view")]
    pub tokens: bool,
    /// `start:end` scalar offsets into the normalized line
    #[arg(long, group = "view")]
    pub offsets: bool,
    /// Override the model's unknown-character policy
    #[arg(long, value_enum)]
    pub fallback: Option<FallbackArg>,
}

#[derive(Args, Debug, Serialize)]
pub struct DecodeArgs {
    #[arg(long)]
    pub model: PathBuf,
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ScoreArgs {
    /// Gold TSV or role-annotation JSONL
    #[arg(long)]
    pub gold: PathBuf,
    /// Plain text for the token distribution; gold words otherwise
    #[arg(long)]
    pub text: Option<PathBuf>,
    /// Rényi order
    #[arg(long, default_value_t = movoc::metrics::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// MorphScore counts a word only when every gold boundary is found
    #[arg(long)]
    pub strict: bool,
    /// Average precision and recall per word
    #[arg(long = "macro")]
    pub macro_average: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub score: ScoreArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct CompareArgs {
    pub model_a: PathBuf,
    pub model_b: PathBuf,
    #[command(flatten)]
    pub score: ScoreArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct PipelineArgs {
    /// JSON config: size, ratio, optional merges, languages [{tag, plain, segmented}]
    pub config: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct GenArgs {
    #[arg(long, default_value_t = 5000)]
    pub words: usize,
    #[arg(long, default_value_t = 20)]
    pub prefixes: usize,
    #[arg(long, default_value_t = 200)]
    pub stems: usize,
    #[arg(long, default_value_t = 20)]
    pub suffixes: usize,
    /// Also write the running text, one word occurrence per token
    #[arg(long)]
    pub plain: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Normalize(a) => commands::normalize_cmd(&cli.global, a),
        Command::Pretokenize(a) => commands::pretokenize_cmd(&cli.global, a),
        Command::TrainBpe(a) => commands::train_bpe(&cli.global, a),
        Command::ExtractMorphemes(a) => commands::extract_morphemes_cmd(&cli.global, a),
        Command::BuildVocab(a) => commands::build_vocab(&cli.global, a),
        Command::Train(a) => commands::train(&cli.global, a),
        Command::Encode(a) => commands::encode(&cli.global, a),
        Command::Decode(a) => commands::decode(&cli.global, a),
        Command::Eval(a) => commands::eval(&cli.global, a),
        Command::Compare(a) => commands::compare(&cli.global, a),
        Command::Pipeline(a) => commands::pipeline(&cli.global, a),
        Command::GenSynthetic(a) => commands::gen_synthetic(&cli.global, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let msg = format!("{err:#}").replace('\n', " ");
            eprintln!("movoc: {msg}");
            ExitCode::from(run::exit_code(&err))
        }
    }
}
