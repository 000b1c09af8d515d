//! `soscert`: SOS and sos-convexity certificates from the command line.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0    | SOS / sos-convex / PASS / search certified |
//! | 1    | bad arguments, unreadable or unparsable input |
//! | 2    | inconclusive |
//! | 3    | solver failure |
//! | 4    | missing fixture |
//! | 10   | not SOS / convex but not sos-convex / FAIL |
//! | 11   | not sos-convex, convexity not certified |
//! | 12   | search infeasible |
//! | 13   | search budget exhausted |

mod commands;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub mod exit {
    pub const OK: u8 = 0;
    pub const INPUT: u8 = 1;
    pub const INCONCLUSIVE: u8 = 2;
    pub const SOLVER: u8 = 3;
    pub const MISSING_FIXTURE: u8 = 4;
    pub const NEGATIVE: u8 = 10;
    pub const NOT_SOS_CONVEX_UNKNOWN: u8 = 11;
    pub const INFEASIBLE: u8 = 12;
    pub const EXHAUSTED: u8 = 13;
}

#[derive(Debug, Parser)]
#[command(name = "soscert", version, about = "Exact SOS and sos-convexity certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Numeric {
    /// Threshold on the normalized optimum of the SOS program.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// First denominator tried when rounding Gram matrices.
    #[arg(long = "denom-bound", default_value_t = 1_000_000)]
    pub denom_bound: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether a polynomial is SOS and write the certificate.
    CheckSos {
        input: PathBuf,
        #[command(flatten)]
        numeric: Numeric,
        /// Multiply by (sum x_i^2)^r, or (1 + sum x_i^2)^r for non-forms.
        #[arg(long, default_value_t = 0)]
        r: u32,
        /// Certificate path (default: <input>.cert.json).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Machine-readable report path.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Sos-convexity test and multiplier-certified convexity.
    CheckSosConvex {
        input: PathBuf,
        #[command(flatten)]
        numeric: Numeric,
        /// Largest multiplier exponent tried for convexity.
        #[arg(long, default_value_t = 3)]
        r: u32,
        /// Directory for the certificates (default: next to the input).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Exactly verify a Gram or separation certificate.
    Verify {
        certificate: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Search for a convex but not sos-convex form (or a psd non-SOS form).
    Search {
        /// Search configuration (JSON); defaults apply when omitted.
        config: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        r: Option<u32>,
        #[arg(long)]
        margin: Option<f64>,
        /// Directory for the result bundle.
        #[arg(long, default_value = "search-result")]
        out: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Re-run every check of the worked convex but not sos-convex example.
    ReproducePaper {
        /// Directory holding the certificate fixtures (default: built in).
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[command(flatten)]
        numeric: Numeric,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Euclidean projection of a form onto the SOS cone.
    Project {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Print the Hessian of a polynomial.
    Hessian {
        input: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap's own usage code (2) is taken by "inconclusive".
            return ExitCode::from(if e.use_stderr() { exit::INPUT } else { exit::OK });
        }
    };
    let code = match cli.command {
        Command::CheckSos {
            input,
            numeric,
            r,
            out,
            json,
        } => commands::check_sos(&input, &numeric, r, out, json),
        Command::CheckSosConvex {
            input,
            numeric,
            r,
            out,
            json,
        } => commands::check_sos_convex(&input, &numeric, r, out, json),
        Command::Verify { certificate, json } => commands::verify(&certificate, json),
        Command::Search {
            config,
            tol,
            r,
            margin,
            out,
            json,
        } => commands::search(config, tol, r, margin, &out, json),
        Command::ReproducePaper { fixtures, numeric, json } => reproduce::run(fixtures, &numeric, json),
        Command::Project { input, out, json } => commands::project(&input, out, json),
        Command::Hessian { input, json } => commands::hessian(&input, json),
    };
    ExitCode::from(code)
}
