use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use embias::Format;

#[derive(Debug, Parser)]
#[command(
    name = "embias",
    version,
    about = "Audit and remove gender bias in word2vec embeddings"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Embedding file in word2vec text or binary format.
    #[arg(long, global = true, value_name = "PATH")]
    pub model: Option<PathBuf>,
    /// Model format; inferred from the extension when omitted (.txt/.vec/.text are text).
    #[arg(long, global = true, value_enum)]
    pub model_format: Option<FormatArg>,
    /// Read only the first N rows of the model.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(usize))]
    pub limit: Option<usize>,
    /// RFC 3339 timestamp stamped into reports instead of the current time.
    #[arg(long, global = true, value_name = "RFC3339")]
    pub timestamp: Option<String>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Binary,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Binary => Format::Binary,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableOutput {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Diff,
    Pca,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Confidence {
    #[value(name = "0.95")]
    P95,
    #[value(name = "0.99")]
    P99,
}

impl Confidence {
    pub fn level(self) -> f64 {
        match self {
            Confidence::P95 => 0.95,
            Confidence::P99 => 0.99,
        }
    }
}

/// A `female,male` seed pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seed(pub String, pub String);

impl Default for Seed {
    fn default() -> Self {
        Seed("ela".into(), "ele".into())
    }
}

impl std::fmt::Display for Seed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{}", self.0, self.1)
    }
}

fn parse_seed(s: &str) -> Result<Seed, String> {
    match s.split(',').map(str::trim).collect::<Vec<_>>()[..] {
        [f, m] if !f.is_empty() && !m.is_empty() && f != m => Ok(Seed(f.into(), m.into())),
        _ => Err(format!("expected two distinct words as F,M, got {s:?}")),
    }
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank words by 3CosAdd: mean of the positive minus negative unit vectors.
    Analogy(AnalogyArgs),
    /// Nearest neighbours of one word by cosine.
    Neighbors(NeighborsArgs),
    /// Print model size and a few rows.
    Inspect(InspectArgs),
    /// Profession-analogy accuracy: does `seed_f + male - seed_m` land on the female form?
    Evaluate(EvaluateArgs),
    /// Hard-debias the model and write the result.
    Debias(DebiasArgs),
    /// Two tables of the most strongly gendered analogies among probe words.
    Extremes(ExtremesArgs),
    /// Two-proportion z-test between the accuracies of two evaluate reports.
    Compare(CompareArgs),
    /// Rewrite a model in another format, optionally truncated with --limit.
    Convert(ConvertArgs),
}

#[derive(Debug, Args)]
pub struct AnalogyArgs {
    #[arg(long = "positive", value_name = "WORD", required = true)]
    pub positives: Vec<String>,
    #[arg(long = "negative", value_name = "WORD")]
    pub negatives: Vec<String>,
    #[arg(long, default_value_t = 10, value_parser = positive)]
    pub top_n: usize,
    #[arg(long, value_enum, default_value_t = Output::Text)]
    pub output: Output,
    /// Write the rendered output here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NeighborsArgs {
    pub word: String,
    #[arg(long, default_value_t = 10, value_parser = positive)]
    pub top_n: usize,
    #[arg(long, value_enum, default_value_t = Output::Text)]
    pub output: Output,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Number of leading words to list.
    #[arg(long, default_value_t = 10)]
    pub head: usize,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Profession pairs, one `female,male` per line.
    #[arg(long, value_name = "PATH")]
    pub pairs: PathBuf,
    #[arg(long, value_parser = parse_seed, default_value = "ela,ele", value_name = "F,M")]
    pub seed: Seed,
    /// Count pairs with an out-of-vocabulary word as skipped instead of failing.
    #[arg(long)]
    pub skip_oov: bool,
    /// A pair is correct if its female word is among the top K results.
    #[arg(long, default_value_t = 1, value_parser = positive, value_name = "K")]
    pub top_k_match: usize,
    #[arg(long, value_enum, default_value_t = TableOutput::Text)]
    pub output: TableOutput,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DebiasArgs {
    /// Pairs that define the gender subspace.
    #[arg(long, value_name = "PATH")]
    pub definitional: PathBuf,
    /// Pairs to equalize after neutralizing.
    #[arg(long, value_name = "PATH")]
    pub equalize: Option<PathBuf>,
    /// Words copied through unchanged.
    #[arg(long, value_name = "PATH")]
    pub gender_specific: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MethodArg::Diff)]
    pub method: MethodArg,
    /// Subspace rank for --method pca.
    #[arg(long, default_value_t = 1, value_parser = positive)]
    pub components: usize,
    /// Path of the debiased model.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Binary)]
    pub out_format: FormatArg,
    #[arg(long, value_enum, default_value_t = Output::Text)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ExtremesArgs {
    #[arg(long, value_parser = parse_seed, default_value = "ela,ele", value_name = "F,M")]
    pub seed: Seed,
    /// Probe words used for both tables.
    #[arg(long, value_name = "PATH", required_unless_present_any = ["she_probes", "he_probes"])]
    pub probes: Option<PathBuf>,
    /// Probe words for the 'she' table (overrides --probes for that side).
    #[arg(long, value_name = "PATH")]
    pub she_probes: Option<PathBuf>,
    /// Probe words for the 'he' table (overrides --probes for that side).
    #[arg(long, value_name = "PATH")]
    pub he_probes: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub per_side: usize,
    #[arg(long, value_enum, default_value_t = Output::Text)]
    pub output: Output,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// JSON report from `evaluate --output json`.
    pub report_a: PathBuf,
    pub report_b: PathBuf,
    #[arg(long, value_enum, default_value_t = Confidence::P99)]
    pub confidence: Confidence,
    #[arg(long, value_enum, default_value_t = Output::Text)]
    pub output: Output,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Output format; inferred from the --out extension when omitted.
    #[arg(long, value_enum)]
    pub out_format: Option<FormatArg>,
}
