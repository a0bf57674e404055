//! `eedesign`: optimize, sweep and validate energy-efficient uplink designs.
//!
//! Exit codes: 0 success, 1 validation failure, 2 infeasible input,
//! 3 configuration or usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eedesign::{Combiner, Error};

mod commands;
mod output;

#[derive(Debug, Parser)]
#[command(name = "eedesign", version, about = "Energy-efficient design of dense uplink massive MIMO networks")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// `key=value` parameter file; missing keys keep their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    /// Write `<PREFIX>.csv` (and `<PREFIX>.svg`) instead of CSV on stdout.
    #[arg(long, global = true, value_name = "PREFIX")]
    pub out: Option<PathBuf>,

    /// Also render an SVG plot; needs --out.
    #[arg(long, global = true)]
    pub svg: bool,

    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[arg(long, short, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CombinerArg {
    Zf,
    Mr,
}

impl From<CombinerArg> for Combiner {
    fn from(c: CombinerArg) -> Self {
        match c {
            CombinerArg::Zf => Combiner::Zf,
            CombinerArg::Mr => Combiner::Mr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Moments of the interference sums over Poisson drops.
    Geometry,
    /// Channel-level identities of the ZF combiner and the interference terms.
    #[value(name = "appendix-a")]
    Channel,
    /// SINR bound assembled from channel draws against the geometry SINR.
    Uatf,
    All,
}

/// How the typical UE is chosen in Monte Carlo runs.
#[derive(Debug, Args, Clone, Copy)]
pub struct TypicalOpts {
    /// Average over every UE of each drop instead of one typical UE.
    #[arg(long, conflicts_with = "single_typical")]
    pub all_ues: bool,

    /// One typical UE per drop (the default; kept for explicit scripts).
    #[arg(long)]
    pub single_typical: bool,

    /// Exactly this many BSs per drop instead of a Poisson count.
    #[arg(long, value_name = "N")]
    pub fixed_bs_count: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal (ζ, M, K) for one SINR target and density.
    Optimize {
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, value_enum, default_value = "zf")]
        combiner: CombinerArg,
        /// Starting point as `M,K`.
        #[arg(long, value_name = "M,K", value_parser = parse_pair)]
        start: Option<(f64, f64)>,
    },
    /// EE at the optimum as a function of BS density.
    SweepLambda {
        /// SINR targets.
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 7.0])]
        gamma: Vec<f64>,
        /// Explicit λ grid; overrides the range options.
        #[arg(long, value_delimiter = ',')]
        lambda: Option<Vec<f64>>,
        #[arg(long, default_value_t = 10.0)]
        lambda_min: f64,
        #[arg(long, default_value_t = 1000.0)]
        lambda_max: f64,
        #[arg(long, default_value_t = 13)]
        lambda_points: usize,
        /// Linear instead of logarithmic spacing.
        #[arg(long)]
        linear: bool,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [CombinerArg::Zf, CombinerArg::Mr])]
        combiners: Vec<CombinerArg>,
        /// Add Monte Carlo rows (ZF) with this many drops per point.
        #[arg(long, value_name = "N")]
        mc_drops: Option<usize>,
        /// Evaluate one `M,K` design across λ instead of re-optimizing.
        #[arg(long, value_name = "M,K", value_parser = parse_pair, conflicts_with = "from_csv")]
        fixed_design: Option<(f64, f64)>,
        /// Re-evaluate the designs recorded in an earlier sweep CSV.
        #[arg(long, value_name = "PATH")]
        from_csv: Option<PathBuf>,
        #[command(flatten)]
        typical: TypicalOpts,
    },
    /// EE over an (M, K) grid with ζ = ζ*(M, K).
    Surface {
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 200)]
        m_max: i64,
        #[arg(long, default_value_t = 40)]
        k_max: i64,
        #[arg(long, value_enum, default_value = "zf")]
        combiner: CombinerArg,
    },
    /// EE versus ASE traced by M at fixed K.
    Tradeoff {
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [5, 10])]
        k: Vec<i64>,
        #[arg(long, default_value_t = 300)]
        m_max: i64,
    },
    /// Monte Carlo checks of the closed forms; exit 1 if any fails.
    Validate {
        #[arg(value_enum, default_value = "all")]
        suite: Suite,
        /// Drops (geometry) or channel draws (appendix-a, uatf).
        #[arg(short, long)]
        n: Option<usize>,
        /// Restrict the channel suites to one `M,K`.
        #[arg(long, value_name = "M,K", value_parser = parse_pair)]
        size: Option<(f64, f64)>,
        #[command(flatten)]
        typical: TypicalOpts,
    },
    /// Dump sampled network drops as CSV.
    SimulateDrop {
        #[arg(long)]
        lambda: Option<f64>,
        /// UEs per cell.
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        drops: usize,
        /// Torus side length [km].
        #[arg(long, default_value_t = 3.0)]
        side: f64,
        #[arg(long, value_name = "N")]
        fixed_bs_count: Option<usize>,
    },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `M,K`, got `{s}`"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok((num(a)?, num(b)?))
}

/// Raised when a validation suite has failing lines.
#[derive(Debug)]
pub struct ValidationFailed(pub Vec<String>);

impl std::fmt::Display for ValidationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "validation failed: {}", self.0.join(", "))
    }
}

impl std::error::Error for ValidationFailed {}

/// Usage problems found after argument parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ValidationFailed>().is_some() {
        return 1;
    }
    if err.downcast_ref::<UsageError>().is_some() {
        return 3;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Infeasible(_)) => 2,
        Some(Error::Numerical(_) | Error::Sampling(_)) => 1,
        Some(_) => 3,
        None if err.downcast_ref::<std::io::Error>().is_some() => 3,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
