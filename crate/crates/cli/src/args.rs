use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "polar-ot",
    version,
    about = "Polar-code oblivious transfer over BI-AWGN"
)]
pub struct Cli {
    /// Log filter, e.g. `info` or `polar_ot=debug`. Falls back to OT_LOG.
    #[arg(long, global = true)]
    pub log_level: Option<String>,

    /// Upper bound on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// JSON file with default values for any flag; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub params: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// GA bit-channel MIs, Bhattacharyya bounds and good/bad classes.
    Construct(ConstructArgs),
    /// Bit-permutation automorphisms of T with their induced index maps.
    Aut(AutArgs),
    /// Search bit permutations for the best cross-cut selection.
    Optimize(OptimizeArgs),
    /// Key-length budget of a stored selection.
    Rate(RateArgs),
    /// Monte-Carlo hash-input error of a stored selection.
    Simulate(SimulateArgs),
    /// One-sided Clopper-Pearson upper limit.
    CpBound(CpBoundArgs),
    /// Run the OT protocol.
    #[command(subcommand)]
    Ot(OtCommand),
}

#[derive(Debug, Clone, Args)]
pub struct ChannelArgs {
    /// Block length (power of two).
    #[arg(long)]
    pub n: Option<usize>,
    /// Stage count, n = 2^m.
    #[arg(long, conflicts_with = "n")]
    pub m: Option<usize>,
    /// Linear SNR.
    #[arg(long)]
    pub snr: Option<f64>,
    /// SNR in dB.
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    /// Bare scalar (cp-bound only).
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Report format; each command has its own default.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Good/bad threshold; defaults to 2^(-n^0.3) clipped to [1e-6, 0.25].
    #[arg(long)]
    pub gamma: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
#[group(id = "aut_mode", multiple = false)]
pub struct AutArgs {
    #[arg(long)]
    pub m: Option<usize>,
    /// List every bit permutation with its index map (default).
    #[arg(long, group = "aut_mode")]
    pub list: bool,
    /// Check whether a permutation file is an automorphism of T.
    #[arg(long, value_name = "FILE", group = "aut_mode")]
    pub check: Option<PathBuf>,
    /// Bit permutations commuting with the one in FILE.
    #[arg(long, value_name = "FILE", group = "aut_mode")]
    pub centralizer: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairingArg {
    Any,
    Swap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitArg {
    Profile,
    Canonical,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Number of cross-cut pairs.
    #[arg(long)]
    pub k: Option<usize>,
    /// `swap` keeps only 2-cycles of π so the result can run as a session.
    #[arg(long, value_enum)]
    pub pairing: Option<PairingArg>,
    #[arg(long, value_enum)]
    pub split: Option<SplitArg>,
    /// Candidate budget when m is too large to enumerate.
    #[arg(long)]
    pub max_perms: Option<usize>,
    /// Hash output length; defaults to k.
    #[arg(long)]
    pub ell: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the selection as a session config usable by rate, simulate and ot run.
    #[arg(long, value_name = "FILE")]
    pub save: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BudgetArgs {
    #[arg(long)]
    pub eps_s: Option<f64>,
    #[arg(long)]
    pub eps_p: Option<f64>,
    #[arg(long)]
    pub eps_sw: Option<f64>,
    /// Dispersion V used in the reconciliation back-off.
    #[arg(long)]
    pub v: Option<f64>,
    /// Replaces the computed c_eps.
    #[arg(long)]
    pub c_eps: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    /// Session config written by `optimize --save`.
    #[arg(long, value_name = "FILE", conflicts_with = "sigma")]
    pub selection: Option<PathBuf>,
    /// Bit permutation file; the selection is then the top-k rule under it.
    #[arg(long, value_name = "FILE")]
    pub sigma: Option<PathBuf>,
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum)]
    pub pairing: Option<PairingArg>,
    #[arg(long, value_enum)]
    pub split: Option<SplitArg>,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_name = "FILE")]
    pub selection: Option<PathBuf>,
    /// Override the artifact's SNR (linear).
    #[arg(long)]
    pub snr: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Confidence parameter of the upper limit.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Injected random-bit counts to sweep, comma separated; defaults to
    /// every announced pair.
    #[arg(long, value_delimiter = ',')]
    pub rand: Option<Vec<usize>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CpBoundArgs {
    /// Observed failures.
    #[arg(long)]
    pub k: Option<u64>,
    /// Number of trials.
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Subcommand)]
pub enum OtCommand {
    /// One session as Alice or Bob over TCP, or both parties in-process.
    Run(OtRunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RoleArg {
    Alice,
    Bob,
    /// Both parties in one process.
    Loopback,
}

#[derive(Debug, Args)]
pub struct OtRunArgs {
    #[arg(long, value_enum)]
    pub role: RoleArg,
    /// Session config or `optimize` artifact.
    #[arg(long, value_name = "FILE")]
    pub config: PathBuf,
    #[arg(long, value_name = "HOST:PORT", conflicts_with = "listen")]
    pub connect: Option<String>,
    #[arg(long, value_name = "HOST:PORT")]
    pub listen: Option<String>,
    /// Bob's choice bit.
    #[arg(long)]
    pub choice: Option<u8>,
    /// Alice's messages: JSON `{"m0": "0110", "m1": "1010"}`.
    #[arg(long, value_name = "FILE")]
    pub messages: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the session transcript (one frame per line).
    #[arg(long, value_name = "FILE")]
    pub transcript: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}
