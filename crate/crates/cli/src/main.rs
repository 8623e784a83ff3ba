//! `ggwave`: simulations, traveling-wave profiles and parameter sweeps for the
//! acid-mediated tumor invasion model.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 usage error.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod manifest;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ggwave_core::Error;

#[derive(Debug, Parser)]
#[command(
    name = "ggwave",
    version,
    about = "Traveling waves of the acid-mediated tumor invasion model",
    allow_negative_numbers = true,
    propagate_version = true
)]
struct Cli {
    /// Directory for CSV tables and the run manifest.
    #[arg(long, global = true, env = "GGWAVE_OUT_DIR", default_value = "ggwave-out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the reaction-diffusion system (or the reduced model with --qss).
    Simulate(commands::SimulateArgs),
    /// Leading-order fast traveling wave.
    Fastwave(commands::FastwaveArgs),
    /// Singular slow traveling wave and its layer.
    Slowwave(commands::SlowwaveArgs),
    /// Front of the layer problem D v'' + c v' + beta v (1 - v) = 0.
    Layer(commands::LayerArgs),
    /// Eigenvalues of the layer Jacobian along a critical-manifold branch.
    Eigen(commands::EigenArgs),
    /// Predicted interstitial gap and switch points.
    Gap(commands::GapArgs),
    /// Run a JSON-described parameter grid and collect one CSV row per point.
    Sweep(sweep::SweepArgs),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(Error),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// Rows of a sweep failed; the table was still written.
    FailedRows(usize),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Numerical(_) | Self::Io { .. } | Self::FailedRows(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. }
            | Error::DomainError(_)
            | Error::BoundaryAlpha(_)
            | Error::CflViolation { .. } => Self::Usage(e.to_string()),
            other => Self::Numerical(other),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(msg) => write!(f, "usage: {msg}"),
            Self::Numerical(e) => write!(f, "numerical failure: {e}"),
            Self::Io { path, source } => write!(f, "{}: {source}", path.display()),
            Self::FailedRows(n) => write!(f, "{n} sweep row(s) failed"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.as_path();
    let result = match &cli.command {
        Command::Simulate(args) => commands::simulate(args, out),
        Command::Fastwave(args) => commands::fastwave(args, out),
        Command::Slowwave(args) => commands::slowwave(args, out),
        Command::Layer(args) => commands::layer(args, out),
        Command::Eigen(args) => commands::eigen(args, out),
        Command::Gap(args) => commands::gap(args),
        Command::Sweep(args) => sweep::sweep(args, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ggwave: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
