use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Exact experiments with mollifiers, delta nets, embedded distributions and asymptotic numbers.
#[derive(Parser, Debug)]
#[command(name = "asympt", version)]
pub struct Cli {
    /// Print JSON reports instead of tables.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build or audit a mollifier with vanishing moments.
    #[command(subcommand)]
    Mollifier(MollifierCmd),
    /// Audit the delta net built from a mollifier file.
    #[command(subcommand)]
    Delta(DeltaCmd),
    /// Build a cut-off function on a domain.
    #[command(subcommand)]
    Cutoff(CutoffCmd),
    /// Pair distributions with test functions.
    #[command(subcommand)]
    Dist(DistCmd),
    /// Embed a distribution, pair it along a ladder and fit the asymptotic number.
    Embed(EmbedArgs),
    /// Pair the product of two embedded distributions.
    Product(ProductArgs),
    /// Fit asymptotic expansions to sampled data.
    #[command(subcommand)]
    Expand(ExpandCmd),
    /// Evaluate expressions in the truncated series field.
    Field(FieldArgs),
}

#[derive(Subcommand, Debug)]
pub enum MollifierCmd {
    /// Construct θ and print its moment table.
    Build(MollifierBuild),
    /// Re-check a mollifier file: moments, L1 enclosure and exponent report.
    Audit {
        file: PathBuf,
        /// Ladder for the exponent report.
        #[arg(long, default_value = "2^-3..2^-12")]
        ladder: String,
    },
}

#[derive(Args, Debug)]
pub struct MollifierBuild {
    #[arg(long)]
    pub k: usize,
    /// Construction parameter; searched from `--delta` when omitted.
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Target L1 excess for the search.
    #[arg(long, default_value = "1/20")]
    pub delta: String,
    /// Bump smoothness; defaults to k + 3.
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, default_value = "moll.json")]
    pub out: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum DeltaCmd {
    Audit {
        #[arg(long)]
        moll: PathBuf,
        #[arg(long)]
        epsilon: String,
        #[arg(long, default_value_t = 2)]
        alpha_max: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum CutoffCmd {
    Build {
        #[arg(long)]
        domain: String,
        #[arg(long)]
        epsilon: String,
        #[arg(long)]
        moll: PathBuf,
        #[arg(long, default_value = "cutoff.json")]
        out: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum DistCmd {
    Pair {
        #[arg(long)]
        dist: String,
        /// Test-function spec (`bump@a:r[:m]`, `poly:c0,c1@[a,b][:m]`) or a JSON piecewise file.
        #[arg(long)]
        phi: String,
        /// Width bound for enclosed (principal value) results.
        #[arg(long, default_value = "2^-40")]
        tol: String,
    },
}

/// Delta net source: a mollifier file, or parameters to build one.
#[derive(Args, Debug)]
pub struct NetArgs {
    #[arg(long)]
    pub moll: Option<PathBuf>,
    /// Moment order when no file is given.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Bump smoothness when no file is given; defaults to k + 3.
    #[arg(long)]
    pub m: Option<u32>,
    /// Construction parameter when no file is given.
    #[arg(long, default_value = "1/16")]
    pub moll_epsilon: String,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long, default_value = "2^-3..2^-12")]
    pub ladder: String,
    /// `int`, `half` or a comma-separated exponent list.
    #[arg(long, default_value = "int")]
    pub grid: String,
    #[arg(long, default_value = "8")]
    pub trunc: String,
    /// Residual tolerance for accepting a fitted expansion.
    #[arg(long, default_value = "10^-6")]
    pub tol: String,
}

#[derive(Args, Debug)]
pub struct EmbedArgs {
    #[arg(long)]
    pub dist: String,
    #[arg(long, default_value = "R")]
    pub domain: String,
    #[command(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    /// Test function to pair with.
    #[arg(long)]
    pub pair: String,
    /// Per-slice CSV (epsilon, pairing, error).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Compact window `lo,hi` for a moderate/null growth report.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub alpha_max: usize,
}

#[derive(Args, Debug)]
pub struct ProductArgs {
    #[arg(long)]
    pub lhs: String,
    #[arg(long)]
    pub rhs: String,
    #[arg(long)]
    pub phi: String,
    #[arg(long, default_value = "R")]
    pub domain: String,
    #[command(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum ExpandCmd {
    /// Fit `Σ a_q ε^q` to CSV samples `epsilon,value_num,value_den` or `epsilon,lo,hi`.
    Fit {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value = "int")]
        grid: String,
        #[arg(long, default_value = "8")]
        trunc: String,
        #[arg(long, default_value = "10^-6")]
        tol: String,
    },
}

#[derive(Args, Debug)]
pub struct FieldArgs {
    /// Expression in `e`, e.g. `1/(1-e)`.
    #[arg(long, conflicts_with = "roots", allow_hyphen_values = true)]
    pub expr: Option<String>,
    /// Semicolon-separated polynomial coefficients `a0; a1; ...` whose roots are wanted.
    #[arg(long, allow_hyphen_values = true)]
    pub roots: Option<String>,
    #[arg(long, default_value = "8")]
    pub trunc: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(commands::Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(commands::Failure::Compute(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
