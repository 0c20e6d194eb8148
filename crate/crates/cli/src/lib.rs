//! Command-line front end for `apfree`: count, check, construct and verify
//! AP-free permutations.
//!
//! Exit codes: 0 success (or AP-free), 1 AP found or a check failed,
//! 2 usage or input error, 3 search too large.

mod commands;
mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};

use apfree::Parity;

#[derive(Parser, Debug)]
#[command(name = "apfree", version, about = "Arithmetic-progression-free permutations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Count permutations of 1..n that avoid a k-term AP.
    Count(CountArgs),
    /// Look for an AP subsequence in a sequence.
    Check(CheckArgs),
    /// Print the first values of an infinite block stream.
    Construct(ConstructArgs),
    /// Density profile and closed forms of a block set.
    Density(DensityArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ParityArg {
    Any,
    Odd,
    Even,
}

impl From<ParityArg> for Parity {
    fn from(p: ParityArg) -> Self {
        match p {
            ParityArg::Any => Parity::Any,
            ParityArg::Odd => Parity::Odd,
            ParityArg::Even => Parity::Even,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StreamArg {
    #[value(name = "theorem2", alias = "interleaved")]
    Interleaved,
    Fourfree,
    Threefree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Claim11,
    Recurrences,
    Bounds,
    Streams,
    Oracle,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = ParityArg::Any)]
    pub parity: ParityArg,
    /// Comma-separated forced prefix, e.g. 2,1.
    #[arg(long, default_value = "")]
    pub prefix: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// JSON cache file read before and updated after the search.
    #[arg(long)]
    pub cache: Option<std::path::PathBuf>,
    /// Largest n the search accepts.
    #[arg(long, default_value_t = 20)]
    pub ceiling: usize,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// File of whitespace-separated integers, or '-' for stdin.
    #[arg(long)]
    pub input: String,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = ParityArg::Any)]
    pub parity: ParityArg,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    #[arg(long, value_enum)]
    pub stream: StreamArg,
    /// Base for the fourfree stream.
    #[arg(long, default_value_t = 2)]
    pub a: u64,
    #[arg(long)]
    pub limit: usize,
    /// Emit '#' comment lines at block boundaries.
    #[arg(long)]
    pub annotate_blocks: bool,
    /// Defaults to the line-per-value dump.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[arg(long, value_enum)]
    pub stream: StreamArg,
    #[arg(long, default_value_t = 2)]
    pub a: u64,
    #[arg(long, default_value_t = 8)]
    pub k_max: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Largest n for count-based suites.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Stream prefix length for the streams suite.
    #[arg(long)]
    pub prefix_len: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// Parses `args` (program name first), runs the command writing its report
/// to `out`, and returns the process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Count(args) => commands::count(args, out),
        Command::Check(args) => commands::check(args, out),
        Command::Construct(args) => commands::construct(args, out),
        Command::Density(args) => commands::density(args, out),
        Command::Verify(args) => commands::verify(args, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("apfree: {e}");
            commands::exit_code_for(&e)
        }
    }
}
