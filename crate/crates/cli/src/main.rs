mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::output::{emit, Report};

/// Algebraic analysis of AES-like key schedules.
#[derive(Parser, Debug)]
#[command(name = "ksprim", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GlobalOpts {
    /// Report format. JSON is the stable contract.
    #[arg(long, value_enum, default_value_t = OutputFormat::Json, global = true)]
    pub output: OutputFormat,
    /// RNG seed; recorded in every report.
    #[arg(long, default_value_t = 1, global = true)]
    pub seed: u64,
    /// Wall-clock budget in milliseconds for searches.
    #[arg(long, env = "KSPRIM_BUDGET_MS", global = true)]
    pub budget_ms: Option<u64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    Sampled,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RhoKind {
    /// Uniformly random non-affine permutation.
    Random,
    /// Random affine permutation.
    Affine,
    /// Inversion in GF(2^n).
    Inversion,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Differential and anti-invariance profile of an S-box.
    SboxAudit(SboxAuditArgs),
    /// AES-128 key expansion.
    Expand(ExpandArgs),
    /// Invariant-subspace closure search against a power of the operator.
    Search(SearchArgs),
    /// Exhaustive primitivity check for a toy-sized rho and its lift.
    Primitivity(PrimitivityArgs),
    /// Goursat tower of a subspace read from a file.
    Goursat(GoursatArgs),
    /// Check the four-round invariant subspace of the AES-128 schedule.
    LpVerify(LpVerifyArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct SboxAuditArgs {
    /// Use the AES S-box.
    #[arg(long, conflicts_with = "file")]
    pub aes: bool,
    /// Table file: whitespace or comma separated hex entries, `#` comments.
    #[arg(required_unless_present = "aes")]
    pub file: Option<PathBuf>,
    /// Largest anti-invariance order to scan for.
    #[arg(long, default_value_t = 1)]
    pub max_order: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct ExpandArgs {
    /// 128-bit key as 32 hex digits, byte 0 first.
    pub key: String,
    /// Recompute every round as operator plus constant translation and
    /// through the formal matrix, and require agreement.
    #[arg(long)]
    pub check_model: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct SearchArgs {
    /// Operator power i.
    #[arg(long, default_value_t = 4, allow_negative_numbers = true)]
    pub power: i64,
    /// Seed the search with a random member of the four-round subspace.
    #[arg(long)]
    pub seed_in_lp: bool,
    /// Number of random seed vectors (ignored with --seed-in-lp).
    #[arg(long, default_value_t = 1)]
    pub seeds: usize,
    /// Samples per closure round.
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    /// Consecutive non-growing rounds before stopping.
    #[arg(long, default_value_t = 64)]
    pub stable_rounds: usize,
    /// Include the AES round constants rc_1..rc_i.
    #[arg(long)]
    pub with_constants: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct PrimitivityArgs {
    /// Toy parameters, `n=<word width>` with 1 ≤ n ≤ 5.
    #[arg(long, value_parser = parse_toy)]
    pub toy: usize,
    #[arg(long, value_enum, default_value_t = RhoKind::Random)]
    pub rho: RhoKind,
    #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
    pub mode: Mode,
    /// Pairs to try in sampled mode.
    #[arg(long, default_value_t = 256)]
    pub samples: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct GoursatArgs {
    /// Subspace file: `m=<dim>` header, then one hex basis vector per line.
    pub file: PathBuf,
    /// Split point for a single decomposition instead of the V²×V² tower.
    #[arg(long)]
    pub split: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct LpVerifyArgs {
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    /// Also resolve the byte placement by closure search.
    #[arg(long)]
    pub resolve: bool,
    /// Write the subspace in the text format used by `goursat`.
    #[arg(long)]
    pub emit_subspace: Option<PathBuf>,
}

fn parse_toy(s: &str) -> Result<usize, String> {
    let n = s
        .strip_prefix("n=")
        .ok_or_else(|| format!("expected n=<width>, got {s:?}"))?
        .parse::<usize>()
        .map_err(|e| e.to_string())?;
    if !(1..=5).contains(&n) {
        return Err(format!("n must be between 1 and 5, got {n}"));
    }
    Ok(n)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let (name, result) = match &cli.command {
        Command::SboxAudit(a) => ("sbox-audit", commands::sbox_audit(a, g)),
        Command::Expand(a) => ("expand", commands::expand(a, g)),
        Command::Search(a) => ("search", commands::search(a, g)),
        Command::Primitivity(a) => ("primitivity", commands::primitivity(a, g)),
        Command::Goursat(a) => ("goursat", commands::goursat(a, g)),
        Command::LpVerify(a) => ("lp-verify", commands::lp_verify(a, g)),
    };
    match result {
        Ok(result) => {
            let report = Report::new(name, &cli.command, g, result);
            emit(&report, g.output);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ksprim {name}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
