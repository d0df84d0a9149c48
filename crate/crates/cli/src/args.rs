use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "logccdm",
    version,
    about = "Constant composition distribution matching with log-domain lookup tables"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build, inspect and check lookup tables.
    #[command(subcommand)]
    Tables(TablesCommand),
    /// Map a k-bit index to a constant composition sequence.
    Match(MatchArgs),
    /// Recover the index of a constant composition sequence.
    Dematch(DematchArgs),
    /// Write a uniformly random index of the right length.
    GenIndex(GenIndexArgs),
    /// Rate, storage and precision sweep over block lengths and table sizes, as CSV.
    Sweep(SweepArgs),
    /// Exhaustive invertibility checks for short blocks.
    Verify(VerifyArgs),
}

#[derive(Debug, Subcommand)]
pub enum TablesCommand {
    /// Build tables and write them in binary form.
    Build(BuildArgs),
    /// Dump tables as CSV (`kind,n_or_s,value`).
    Export(ExportArgs),
    /// Check the covering and no-gap conditions.
    Validate(TablesPath),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Entries per octave.
    #[arg(long)]
    pub s: u32,
    /// Mantissa scale, a power of two.
    #[arg(long)]
    pub m: u32,
    /// Longest supported block, a power of two.
    #[arg(long)]
    pub nmax: u32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TablesPath {
    /// Table file; defaults to $LOGCCDM_TABLES.
    #[arg(long, env = "LOGCCDM_TABLES")]
    pub tables: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub tables: TablesPath,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Fp,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Register,
}

/// Options shared by every command that runs a matcher.
#[derive(Debug, Args)]
pub struct MatcherArgs {
    #[command(flatten)]
    pub tables: TablesPath,
    /// Composition as `n0,n1`.
    #[arg(long)]
    pub comp: String,
    #[arg(long, value_enum, default_value = "log")]
    pub algo: Algo,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: Mode,
    /// Start position of the width exponent; defaults to S.
    #[arg(long, allow_negative_numbers = true)]
    pub s0: Option<i64>,
    /// Extra register bits in register mode.
    #[arg(long, default_value_t = 2)]
    pub guard: u32,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    #[command(flatten)]
    pub matcher: MatcherArgs,
    /// Index file; stdin when absent.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Sequence file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Index is hex text rather than packed bits.
    #[arg(long)]
    pub hex: bool,
    /// Sequence is packed bits rather than ASCII.
    #[arg(long)]
    pub packed: bool,
}

#[derive(Debug, Args)]
pub struct DematchArgs {
    #[command(flatten)]
    pub matcher: MatcherArgs,
    /// Sequence file; stdin when absent.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Index file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub hex: bool,
    #[arg(long)]
    pub packed: bool,
    /// Accept any sequence whose index fits in k bits, skipping the re-match check.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args)]
pub struct GenIndexArgs {
    #[command(flatten)]
    pub matcher: MatcherArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub hex: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// `S:M` pairs, comma separated.
    #[arg(long, default_value = "128:1024,256:512,256:1024,512:1024")]
    pub pairs: String,
    /// Block lengths, comma separated.
    #[arg(long, default_value = "16,32,64,128,256,512,1024,2048,4096,8192")]
    pub nlist: String,
    /// Fraction of ones in each composition.
    #[arg(long, default_value_t = 0.25)]
    pub p1: f64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Check every composition up to this length.
    #[arg(long, default_value_t = 14)]
    pub nmax: u32,
    /// Table file; built as S=16, M=32 when neither this nor $LOGCCDM_TABLES is set.
    #[arg(long, env = "LOGCCDM_TABLES")]
    pub tables: Option<PathBuf>,
    /// Random long-block trials comparing register and exact modes.
    #[arg(long, default_value_t = 0)]
    pub trials: usize,
    /// Block length for the random trials.
    #[arg(long, default_value_t = 1024)]
    pub fuzz_len: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
