use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coxinv_core::Error;

mod commands;

#[derive(Parser, Debug)]
#[command(name = "coxinv", version, about = "Chevalley mappings of reflection groups and jet transfer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Group spec such as `B2`, `I2(5)` or `A1xB2xR1`.
    #[arg(long, global = true)]
    group: Option<String>,
    /// Rational arithmetic (rejected for dihedral data outside m ∈ {3, 4, 6}).
    #[arg(long, global = true, conflicts_with = "float")]
    exact: bool,
    #[arg(long, global = true)]
    float: bool,
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Tolerance override for float-path zero tests.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the result here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Degrees, Coxeter number, reflection count and order.
    GroupInfo,
    /// Basic invariants.
    Invariants,
    /// P(x).
    Eval {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Jacobian factorization det J_P = c ∏ λ_τ.
    JacobianCheck,
    /// Express an invariant polynomial in the basic invariants.
    Rewrite {
        /// Polynomial as JSON `[[exponents, coeff], ...]`, or `@path`.
        #[arg(long)]
        poly: String,
    },
    /// Jets of F∘P at the given points from jets of F (`--input`) or a polynomial F (`--poly`).
    Compose {
        #[arg(long, conflicts_with = "poly")]
        input: Option<PathBuf>,
        #[arg(long)]
        poly: Option<String>,
        /// Points separated by `;`.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Order of the F jets built from `--poly`.
        #[arg(long, default_value_t = 1)]
        r: u32,
    },
    /// Order-r jets of F at P(a) from a composed jet field of f.
    Recover {
        #[arg(long)]
        input: PathBuf,
        /// Points separated by `;`; all field points when omitted.
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        #[arg(long, default_value_t = 1)]
        r: u32,
    },
    /// First derivatives of F at P(x) by Cramer's rule.
    Cramer {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Gradient of f at x.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "poly")]
        grad: Option<String>,
        /// Invariant polynomial f, JSON or `@path`.
        #[arg(long)]
        poly: Option<String>,
        /// Include the cofactor system.
        #[arg(long)]
        system: bool,
    },
    /// Continuity verdict for every β with |β| ≤ hr.
    Ledger {
        #[arg(long, default_value_t = 1)]
        r: u32,
        /// Point whose stratum refines the verdicts.
        #[arg(long, allow_hyphen_values = true)]
        stratum: Option<String>,
    },
    /// Whitney seminorms of a jet field, or the weighted seminorm with `--hr`.
    Seminorm {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        r: u32,
        /// Weighted seminorm of an F field over the images of `--x`.
        #[arg(long, requires = "x")]
        hr: Option<u32>,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        /// Add the empirical r-regularity probe.
        #[arg(long)]
        probe: bool,
    },
    /// Active reflections and isotropy degrees at x.
    Stratify {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Orbit of x and its chamber representative.
    Orbit {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Geodesic/Euclidean distance ratio on P(ball).
    ProbeRegularity {
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 16)]
        k: usize,
    },
    /// Full self-check suite for the group.
    VerifyAll,
}

pub enum Failure {
    Config(String),
    Compute(String),
    /// Verification ran but failed; the report is still printed.
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnsupportedType(_)
            | Error::RankOutOfRange { .. }
            | Error::OrbitCapExceeded { .. }
            | Error::DimensionMismatch { .. }
            | Error::InexactData(_)
            | Error::InvalidField(_)
            | Error::PointNotInField
            | Error::BasePointMismatch
            | Error::Parse(_) => Failure::Config(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("COXINV_THREADS") {
        let n: usize = v.parse().map_err(|_| Failure::Config(format!("COXINV_THREADS must be a count, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(e.to_string()))?;
    }
    Ok(())
}

fn emit(common: &Common, text: &str) -> Result<(), Failure> {
    match &common.output {
        Some(path) => std::fs::write(path, format!("{text}\n")).map_err(|e| Failure::Config(format!("{}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|_| {
        let out = commands::run(&cli.command, &cli.common)?;
        let text = if cli.common.pretty {
            out.table.unwrap_or_else(|| serde_json::to_string_pretty(&out.json).expect("json"))
        } else {
            serde_json::to_string(&out.json).expect("json")
        };
        emit(&cli.common, &text)?;
        out.failure.map_or(Ok(()), Err)
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(m) | Failure::Verify(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
