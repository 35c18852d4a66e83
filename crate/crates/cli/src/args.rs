use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;

use crate::parse::{parse_m_list, parse_resolution, parse_unit_interval, MList, ResolutionArg};
use crate::table::Format;

/// Failure probabilities and critical polarization for ensemble quantum
/// algorithms with a single-bit output.
#[derive(Debug, Parser)]
#[command(name = "qcrit", version)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write output to this file (atomically) instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ensemble failure probability pfail(ε, M, m_min).
    Failprob(FailprobArgs),
    /// Critical polarization at individual ensemble sizes.
    Critical(CriticalArgs),
    /// Critical polarization curve over a range of ensemble sizes.
    Curve(CurveArgs),
    /// Bahadur bounds on binomial upper tails.
    Bahadur(BahadurArgs),
    /// Monte Carlo estimate of the ensemble failure rate.
    Simulate(SimulateArgs),
    /// Classical Deutsch-Jozsa failure probability.
    Classical(ClassicalArgs),
    /// Run the identity self-checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    /// F(Q) = 2^-Q.
    Dj,
    /// Exact classical Deutsch-Jozsa failure; needs --n.
    DjExact,
    /// F(Q) = c^-Q; needs --c.
    Exponential,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Classical competitor.
    #[arg(long, value_enum, default_value_t = ModelKind::Dj)]
    pub model: ModelKind,

    /// Base of the exponential model.
    #[arg(long)]
    pub c: Option<f64>,

    /// Argument bits of the exact Deutsch-Jozsa model.
    #[arg(long)]
    pub n: Option<u32>,

    /// Prior probability that f is balanced (exact Deutsch-Jozsa model).
    #[arg(long = "p-bal", value_parser = parse_unit_interval, default_value = "1/2")]
    pub p_bal: BigRational,

    /// Oracle queries per ensemble member.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub q: u64,
}

#[derive(Debug, Args)]
pub struct ResolutionArgs {
    /// Resolution: `best` (R = 2), `sqrt` (R = √M) or a number ≥ 2.
    #[arg(long = "r", value_parser = parse_resolution, default_value = "best")]
    pub r: ResolutionArg,

    /// Scaling prefactor in R(M) = max(2, R0·M^alpha); overrides --r.
    #[arg(long, requires = "alpha", conflicts_with = "r")]
    pub r0: Option<f64>,

    /// Scaling exponent in R(M) = max(2, R0·M^alpha), 0 ≤ alpha < 1.
    #[arg(long, requires = "r0", conflicts_with = "r")]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FailprobArgs {
    /// Polarization(s), exact: decimal or a/b, comma separated.
    #[arg(long, required = true, value_delimiter = ',', value_parser = parse_unit_interval)]
    pub eps: Vec<BigRational>,

    /// Ensemble size(s): N, a:b, a:b:log, comma separated.
    #[arg(long, required = true, value_parser = parse_m_list)]
    pub m: MList,

    #[command(flatten)]
    pub resolution: ResolutionArgs,

    /// Largest M evaluated in exact rational arithmetic.
    #[arg(long, default_value_t = 2000)]
    pub exact_limit: u64,
}

#[derive(Debug, Args)]
pub struct CriticalArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Ensemble size(s): N, a:b, a:b:log, comma separated.
    #[arg(long, value_parser = parse_m_list)]
    pub m: Option<MList>,

    #[command(flatten)]
    pub resolution: ResolutionArgs,

    /// Skip the exact-rational residual check for M ≤ 1000.
    #[arg(long)]
    pub no_exact_check: bool,

    /// Report the lower bound M0, ε0 for the exponential-type model instead.
    #[arg(long, conflicts_with = "refit")]
    pub threshold: bool,

    /// Refit the intermediate-size Deutsch-Jozsa constant from numeric solves.
    #[arg(long)]
    pub refit: bool,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Ensemble sizes: N, a:b, a:b:log, comma separated.
    #[arg(long, required = true, value_parser = parse_m_list)]
    pub m: MList,

    /// Methods: numeric, asymptotic_general, dj_bestres (bestres),
    /// dj_moderate (moderate), limit.
    #[arg(long, value_delimiter = ',', default_value = "numeric")]
    pub method: Vec<qcrit::critical::Method>,

    #[command(flatten)]
    pub resolution: ResolutionArgs,
}

#[derive(Debug, Args)]
pub struct BahadurArgs {
    /// Number of trials.
    #[arg(long)]
    pub n: u64,

    /// Tail start(s); every m in 0..=n when omitted.
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<u64>,

    /// Success probability, exact: decimal or a/b.
    #[arg(long, value_parser = parse_unit_interval)]
    pub p: BigRational,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Polarization(s), comma separated.
    #[arg(long, required = true, value_delimiter = ',', value_parser = parse_unit_interval)]
    pub eps: Vec<BigRational>,

    /// Ensemble size(s): N, a:b, a:b:log, comma separated.
    #[arg(long, required = true, value_parser = parse_m_list)]
    pub m: MList,

    #[command(flatten)]
    pub resolution: ResolutionArgs,

    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ClassicalArgs {
    /// Argument bits, N = 2^n.
    #[arg(long)]
    pub n: u32,

    /// Distinct queries: N, a:b, a:b:log, comma separated.
    #[arg(long, required = true, value_parser = parse_m_list)]
    pub m: MList,

    /// Prior probability that f is balanced.
    #[arg(long = "p-bal", value_parser = parse_unit_interval, default_value = "1/2")]
    pub p_bal: BigRational,

    /// Monte Carlo trials per row; 0 skips the simulation.
    #[arg(long, default_value_t = 0)]
    pub trials: u64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Run only these checks.
    #[arg(long, value_delimiter = ',')]
    pub check: Vec<String>,
}
