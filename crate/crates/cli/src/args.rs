use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gpi_core::inequality::ScanPredicate;

#[derive(Parser, Debug)]
#[command(
    name = "gpiverify",
    version,
    about = "Exact verification of the computations behind a three-dimensional Gaussian product inequality",
    after_help = "Exit codes: 0 all checks pass, 1 a check failed, 2 indeterminate after refinement, 64 usage error, 74 I/O error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

/// Parameters shared by all commands. Any of them may also come from `--config`;
/// explicit flags win.
#[derive(Args, Debug, Clone, Default)]
pub struct Opts {
    /// First integer exponent parameter (exponent 2*m2)
    #[arg(long, global = true)]
    pub m2: Option<u32>,
    /// Second integer exponent parameter (exponent 2*m3)
    #[arg(long, global = true)]
    pub m3: Option<u32>,
    /// First real exponent
    #[arg(long, global = true)]
    pub y2: Option<f64>,
    /// Second real exponent
    #[arg(long, global = true)]
    pub y3: Option<f64>,
    /// Mixing coefficient in X1 = X2 + a X3 (rational, e.g. -3/4)
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// Correlation of (X2, X3) (rational)
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x: Option<String>,
    /// Point z = x^2 (rational)
    #[arg(long, global = true)]
    pub z: Option<String>,
    /// Left end of a scan interval (overrides the predicate default)
    #[arg(long, global = true)]
    pub z_lo: Option<String>,
    /// Right end of a scan interval (overrides the predicate default)
    #[arg(long, global = true)]
    pub z_hi: Option<String>,
    /// Number of grid points
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Initial width of square-root enclosures [default: 1/1000000]
    #[arg(long, global = true)]
    pub width: Option<String>,
    /// Maximum number of enclosure halvings before a point is indeterminate [default: 20]
    #[arg(long, global = true)]
    pub refine_max: Option<u32>,
    /// Seed for Monte Carlo sampling [default: 1]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo sample count [default: 1000000]
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    /// Write the report here instead of standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores); does not affect results
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// JSON file with default values for the parameters above
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Record wall-clock time in the report (makes reports differ between runs)
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sum-of-squares certificates
    Sos {
        #[command(subcommand)]
        action: SosAction,
    },
    /// Regenerate a polynomial expansion
    Expand {
        target: ExpandTarget,
        /// Compare h with the bundled reference expansion
        #[arg(long)]
        compare: bool,
        /// Compare g with the bundled reference expansion up to a positive scalar
        #[arg(long, visible_alias = "compare-appendix")]
        compare_reference: bool,
    },
    /// Check an inequality at a point or on its default grid
    Check {
        kind: CheckKind,
        /// Search a correlation grid for a violation (mri, gpi-real)
        #[arg(long)]
        find_violation: bool,
    },
    /// Sample a predicate on a uniform grid of z values
    Scan {
        #[arg(value_parser = parse_predicate)]
        predicate: ScanPredicate,
    },
    /// Cross-check moment formulas against independent oracles
    Oracle {
        #[command(subcommand)]
        action: OracleAction,
    },
    /// Derived constants of an exponent pair
    Params {
        #[command(subcommand)]
        action: ParamsAction,
    },
}

#[derive(Subcommand, Debug)]
pub enum SosAction {
    /// Verify bundled certificates (all of them unless --m2 is given) or a certificate file
    Verify {
        #[arg(long)]
        all: bool,
        /// Also check the split of h_{m2} into scale * bracket + nonnegative rest
        #[arg(long)]
        bracket: bool,
        /// Certificate JSON file to verify instead of the bundled ones
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum OracleAction {
    /// Exact moments vs the Wick recursion, or (with --y2 --y3) float formulas vs Monte Carlo
    Compare,
}

#[derive(Subcommand, Debug)]
pub enum ParamsAction {
    Show,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpandTarget {
    H,
    G,
    S,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Gpi,
    Mri,
    Hfri,
    GpiReal,
}

fn parse_predicate(s: &str) -> Result<ScanPredicate, String> {
    s.parse()
}

impl Command {
    /// Command words and switches, as recorded in the report.
    pub fn words(&self) -> Vec<String> {
        let mut w: Vec<String> = Vec::new();
        let flag = |on: bool, name: &str, w: &mut Vec<String>| {
            if on {
                w.push(name.to_string());
            }
        };
        match self {
            Command::Sos { action: SosAction::Verify { all, bracket, file } } => {
                w.extend(["sos".into(), "verify".into()]);
                flag(*all, "--all", &mut w);
                flag(*bracket, "--bracket", &mut w);
                if let Some(f) = file {
                    w.push("--file".into());
                    w.push(f.display().to_string());
                }
            }
            Command::Expand { target, compare, compare_reference } => {
                w.extend(["expand".into(), value_name(*target)]);
                flag(*compare, "--compare", &mut w);
                flag(*compare_reference, "--compare-reference", &mut w);
            }
            Command::Check { kind, find_violation } => {
                w.extend(["check".into(), value_name(*kind)]);
                flag(*find_violation, "--find-violation", &mut w);
            }
            Command::Scan { predicate } => w.extend(["scan".into(), predicate.name().into()]),
            Command::Oracle { .. } => w.extend(["oracle".into(), "compare".into()]),
            Command::Params { .. } => w.extend(["params".into(), "show".into()]),
        }
        w
    }
}

fn value_name(v: impl ValueEnum) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}
