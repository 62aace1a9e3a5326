use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "kocodes", version, about = "Reed-Muller, Polar and KO code experiments")]
pub struct Cli {
    /// Master seed for every random draw (default 0, or the config's seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads (default: KOCODES_THREADS, else all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Code inspection.
    #[command(subcommand)]
    Codes(CodesCommand),
    /// Encode messages into channel symbols.
    Encode(EncodeArgs),
    /// Decode LLRs (classical codes) or received symbols (KO) into bits.
    Decode(DecodeArgs),
    /// Monte-Carlo BER/BLER over an SNR grid.
    Simulate(SimulateArgs),
    /// Train a KO code.
    Train(TrainArgs),
    /// Distance, BLER-decomposition and complexity analyses.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
}

#[derive(Subcommand, Debug)]
pub enum CodesCommand {
    /// Length, dimension, rate, minimum distance and Plotkin tree.
    Info(CodeArgs),
}

#[derive(Subcommand, Debug)]
pub enum AnalyzeCommand {
    PairwiseDistances(DistanceArgs),
    BlerDecomposition(BlerArgs),
    Opcount(OpcountArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Rm,
    Polar,
    Ko,
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    Standard,
    Tiny,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Random,
    Zeros,
}

#[derive(Args, Debug, Clone)]
pub struct CodeArgs {
    #[arg(long, value_enum)]
    pub code: Option<Family>,
    /// log2 of the block length (RM and KO-RM).
    #[arg(long)]
    pub m: Option<usize>,
    /// RM order.
    #[arg(long)]
    pub r: Option<usize>,
    /// Block length (Polar and Gaussian).
    #[arg(long)]
    pub n: Option<usize>,
    /// Dimension (Polar and Gaussian).
    #[arg(long)]
    pub k: Option<usize>,
    /// KO skeleton from a Polar(N, K) code.
    #[arg(long, num_args = 2, value_names = ["N", "K"])]
    pub polar: Option<Vec<usize>>,
    /// Bhattacharyya design value of the Polar construction.
    #[arg(long, default_value_t = 0.5)]
    pub z0: f64,
    /// Trained KO model; implies --code ko.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ProfileArg::Standard)]
    pub profile: ProfileArg,
    /// Initialization of a KO model built without a checkpoint.
    #[arg(long, value_enum, default_value_t = InitArg::Random)]
    pub init: InitArg,
    /// Binarize KO codeword symbols to ±1 (KO-b).
    #[arg(long)]
    pub binarize: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SymbolFormat {
    Csv,
    F64le,
}

#[derive(Args, Debug)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    /// Messages, one 0/1 string per line.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = SymbolFormat::Csv)]
    pub format: SymbolFormat,
}

#[derive(Args, Debug)]
pub struct DecodeArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    /// dumer | sc | dumer-softmap | fht-map | map | ko
    #[arg(long)]
    pub decoder: Option<String>,
    /// One block per row (CSV) or consecutive blocks (f64le).
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = SymbolFormat::Csv)]
    pub format: SymbolFormat,
}

#[derive(Args, Debug, Clone)]
pub struct ChannelArgs {
    /// awgn | rayleigh | bursty
    #[arg(long)]
    pub channel: Option<String>,
    #[arg(long)]
    pub burst_prob: Option<f64>,
    /// Burst noise standard deviation as a multiple of σ.
    #[arg(long)]
    pub burst_sigma_mult: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[arg(long)]
    pub decoder: Option<String>,
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// SNR grid in dB: `lo:step:hi` (inclusive) or a single value.
    #[arg(long, allow_hyphen_values = true)]
    pub snr: Option<String>,
    /// Minimum blocks per SNR point.
    #[arg(long)]
    pub blocks: Option<u64>,
    /// Continue past --blocks until this many block errors.
    #[arg(long)]
    pub min_block_errors: Option<u64>,
    #[arg(long)]
    pub max_blocks: Option<u64>,
    /// JSON simulation config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Results CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Alternating,
    EncoderOnlySoftmap,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Only `ko` is trainable.
    #[arg(long, value_enum)]
    pub code: Option<Family>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    /// KO skeleton from a Polar(N, K) code.
    #[arg(long, num_args = 2, value_names = ["N", "K"])]
    pub polar: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0.5)]
    pub z0: f64,
    #[arg(long, value_enum, default_value_t = ProfileArg::Standard)]
    pub profile: ProfileArg,
    /// Continue training from this checkpoint instead of a fresh model.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// JSON training config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Start from the full-length schedule instead of the desk-scale one.
    #[arg(long)]
    pub full_scale: bool,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub dec_steps: Option<usize>,
    #[arg(long)]
    pub enc_steps: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_dec: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_enc: Option<f64>,
    #[arg(long)]
    pub lr_dec: Option<f64>,
    #[arg(long)]
    pub lr_enc: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub grad_clip: Option<f64>,
    /// Training channel: awgn | rayleigh | bursty
    #[arg(long)]
    pub channel: Option<String>,
    /// Output checkpoint.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Per-step loss log CSV.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DistanceModeArg {
    Exhaustive,
    Random,
}

#[derive(Args, Debug)]
pub struct DistanceArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[arg(long, value_enum, default_value_t = DistanceModeArg::Exhaustive)]
    pub mode: DistanceModeArg,
    /// Pairs drawn in random mode.
    #[arg(long, default_value_t = 100_000)]
    pub pairs: u64,
    #[arg(long, default_value_t = 100)]
    pub bins: usize,
    /// Histogram CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BlerArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[arg(long)]
    pub decoder: Option<String>,
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub snr: f64,
    #[arg(long, default_value_t = 10_000)]
    pub blocks: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OpcountArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[arg(long)]
    pub decoder: Option<String>,
    /// SNR of the received word that is decoded.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub snr: f64,
}
