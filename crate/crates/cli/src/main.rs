//! `natgrad`: transform tables, hypothesis checks and solvers from the
//! command line.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit status on success.
pub const EXIT_OK: u8 = 0;
/// Usage, I/O or document errors.
pub const EXIT_USAGE: u8 = 1;
/// At least one checked condition fails.
pub const EXIT_FAILS: u8 = 2;
/// No condition fails but at least one is inconclusive.
pub const EXIT_INCONCLUSIVE: u8 = 3;
/// A solver did not converge.
pub const EXIT_SOLVER: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "natgrad",
    version,
    about = "Natural-growth p-Laplacian problems: transform, check, solve"
)]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Solver tolerance (residual for solve, Rayleigh quotient for eigen).
    #[arg(long, global = true, value_parser = positive)]
    pub tol: Option<f64>,
    /// Override the number of mesh nodes in the document.
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// Seed for random restarts.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the main output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Progress messages on standard error (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate A(s) = int_0^s e^(G/(p-1)) as CSV.
    Transform {
        problem: PathBuf,
        /// Tabulate on [0, S_MAX] instead of the document's range.
        #[arg(long, value_parser = positive)]
        s_max: Option<f64>,
    },
    /// Check existence hypotheses; emits a JSON report array.
    Check {
        problem: PathBuf,
        /// Conditions to check (repeatable or comma separated); defaults to
        /// the document's list, then to all.
        #[arg(long = "condition", value_delimiter = ',')]
        conditions: Vec<String>,
    },
    /// First Dirichlet eigenvalue of -Delta_p and its eigenfunction.
    Eigen { problem: PathBuf },
    /// Solve one problem; emits the solution CSV and a JSON summary.
    Solve {
        problem: PathBuf,
        #[arg(long, value_enum, default_value_t = Branch::MountainPass)]
        branch: Branch,
        /// Override the document's lambda.
        #[arg(long, value_parser = positive)]
        lambda: Option<f64>,
    },
    /// Trace solution branches in lambda; emits the diagram CSV.
    Bifurcate {
        problem: PathBuf,
        #[arg(long, value_parser = positive)]
        lambda_min: Option<f64>,
        #[arg(long, value_parser = positive)]
        lambda_max: Option<f64>,
        #[arg(long, default_value_t = 16)]
        lambda_steps: usize,
    },
    /// List catalogue entries, or print the document for one of them.
    Catalog {
        #[arg(long)]
        id: Option<String>,
        /// Parameter override `name=value` (repeatable).
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Branch {
    MountainPass,
    Minimal,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be positive and finite, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got {s}"))?;
    let v = v.trim().parse::<f64>().map_err(|e| format!("{k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// Exit code for an error: solver failures map to [`EXIT_SOLVER`].
fn error_code(err: &anyhow::Error) -> u8 {
    let solver = err.chain().any(|e| {
        e.downcast_ref::<natgrad::SolverError>().is_some()
            || matches!(e.downcast_ref::<natgrad::Error>(), Some(natgrad::Error::Solver(_)))
    });
    if solver {
        EXIT_SOLVER
    } else {
        EXIT_USAGE
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e))
        }
    }
}
