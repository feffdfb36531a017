//! `lt`: constructions, verifications and spectral studies of truncated
//! λ-Toeplitz operators from the command line.
//!
//! Exit status: 0 on success, 1 when a verification residual exceeds its
//! tolerance, 2 on any input error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::Output;

#[derive(Debug, Parser)]
#[command(
    name = "lt",
    version,
    about = "Truncated lambda-Toeplitz operators: build, verify, analyse"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Identity {
    /// T = U_lambda T_{phi_+twisted}, needs |lambda| = 1.
    Unitary,
    /// T = W_{phi+, lambda z} + W*_{conj phi-, conj(lambda) z}.
    WcoSum,
    /// T = T_{phi~} C_{lambda z}, needs real lambda in (0, 1).
    ToeplitzComp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Fast,
    Naive,
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct Common {
    /// Real part of lambda.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_re: Option<f64>,
    /// Imaginary part of lambda.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_im: Option<f64>,
    /// Symbol file: {"coefficients": [{"n": .., "re": .., "im": ..}, ...]}.
    #[arg(long)]
    pub symbol: Option<PathBuf>,
    /// Truncation sizes, comma separated and strictly ascending.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    /// Write machine-readable output here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dense N×N section of T_{lambda,phi}.
    Build {
        #[command(flatten)]
        common: Common,
    },
    /// T x for a vector read from CSV (all ones by default).
    Apply {
        #[command(flatten)]
        common: Common,
        /// Input vector, "k,re,im" CSV.
        #[arg(long)]
        vector: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Fast)]
        method: Method,
    },
    /// Singular values, norms and decay margins of each section.
    Svd {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = lambda_toeplitz::spectral::DEFAULT_RANK_TOL)]
        rank_tol: f64,
    },
    /// Hilbert-Schmidt norm: closed form against section Frobenius norms.
    Hsnorm {
        #[command(flatten)]
        common: Common,
        /// Relative slack allowed above the closed form.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Quadrature grid for the kernel norm (analytic symbols only).
        #[arg(long, default_value_t = 1024)]
        grid: usize,
    },
    /// Check a factorization identity on each section.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        identity: Identity,
        #[arg(long, default_value_t = lambda_toeplitz::factorization::DEFAULT_TOL)]
        tol: f64,
    },
    /// Numerical rank of each section, checked against the exact count
    /// where the symbol is one-sided.
    Rank {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = lambda_toeplitz::spectral::DEFAULT_RANK_TOL)]
        rank_tol: f64,
    },
    /// Diagonal spectrum of W_{psi, lambda z} for an analytic psi.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e-14)]
        tol: f64,
    },
    /// Operator norms of growing sections for |lambda| = 1.
    Norms {
        #[command(flatten)]
        common: Common,
    },
    /// Solve S*AS = lambda A + B with the borders of T_{lambda,phi}.
    SolveRecurrence {
        #[command(flatten)]
        common: Common,
        /// Right-hand side B, "n,m,re,im" CSV (zero by default).
        #[arg(long)]
        rhs: Option<PathBuf>,
        /// Tolerance for agreement with the direct section when B = 0.
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
    },
    /// Norm growth of the sawtooth sections (lambda = -1, sizes 64,1024 by
    /// default).
    SawtoothDemo {
        #[command(flatten)]
        common: Common,
    },
}

fn run(command: Command) -> Result<(Output, Format, Option<PathBuf>), commands::CliError> {
    let (output, common) = match command {
        Command::Build { common } => (commands::build(&common)?, common),
        Command::Apply {
            common,
            vector,
            method,
        } => (commands::apply(&common, vector.as_deref(), method)?, common),
        Command::Svd { common, rank_tol } => (commands::svd(&common, rank_tol)?, common),
        Command::Hsnorm { common, tol, grid } => (commands::hsnorm(&common, tol, grid)?, common),
        Command::Verify {
            common,
            identity,
            tol,
        } => (commands::verify(&common, identity, tol)?, common),
        Command::Rank { common, rank_tol } => (commands::rank(&common, rank_tol)?, common),
        Command::Spectrum { common, tol } => (commands::spectrum(&common, tol)?, common),
        Command::Norms { common } => (commands::norms(&common)?, common),
        Command::SolveRecurrence { common, rhs, tol } => (
            commands::solve_recurrence(&common, rhs.as_deref(), tol)?,
            common,
        ),
        Command::SawtoothDemo { common } => (commands::sawtooth_demo(&common)?, common),
    };
    Ok((output, common.format, common.out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (output, format, out) = match run(cli.command) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    print!("{}", output.table);
    if let Some(path) = out {
        let body = match format {
            Format::Csv => &output.csv,
            Format::Json => &output.json,
        };
        if let Err(e) = std::fs::write(&path, body) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if output.failed {
        eprintln!("verification failed");
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
