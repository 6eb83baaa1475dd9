//! `kend`: solve ends, expand them, and report Steiner data, fluxes and the
//! acceptance self-test.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

mod artifact;
mod commands;
mod config;
mod report;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] kend::Error),
    #[error("self-test failed: {0}")]
    Selftest(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Selftest(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Usage(_) => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "kend", version, about = "Ends of constant extrinsic curvature surfaces in hyperbolic space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum, serde::Serialize)]
pub enum ExampleKind {
    #[value(name = "I")]
    I,
    #[value(name = "II")]
    II,
    #[value(name = "III")]
    III,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve an end from a JSON config; writes end.csv and solve_report.json.
    SolveEnd {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Asymptotic series of a solved end.
    Expand {
        /// Artifact directory written by solve-end.
        artifact: PathBuf,
        /// Series cutoff; defaults to √(4−3k).
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Steiner data of a solved end or of a symmetric configuration.
    Steiner {
        /// Artifact directory written by solve-end.
        artifact: Option<PathBuf>,
        #[arg(long, value_enum, ignore_case = true, conflicts_with = "artifact")]
        example: Option<ExampleKind>,
        #[arg(long, default_value_t = 3)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        m0: u32,
        #[arg(long, default_value_t = 1)]
        m1: u32,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the Steiner relations for extremities and vectors given as JSON.
    Relations {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-height fluxes of the Killing field X_{a,b} through a solved end.
    Flux {
        artifact: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rotationally symmetric profile from the radial ODE.
    OracleOde {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance suite; exits 1 if any criterion fails.
    Selftest {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Inflate the measured error of criterion N.
        #[arg(long, value_name = "N")]
        inject_fault: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
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
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kend: {e}");
            ExitCode::from(e.code())
        }
    }
}
