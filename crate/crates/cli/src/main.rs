//! `aszeta`: zeta functions and zero statistics of Artin-Schreier covers.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Options, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "aszeta", version, about = "Zeta zero statistics for Artin-Schreier covers Y^p - Y = f(X)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Print L(u, f, ψ^h)
    Lpoly,
    /// Integer zeta numerator P(u) and the functional-equation check
    Zeta,
    /// Zero angles and the RH residual
    Zeros,
    /// Point counts, direct and from the zeta numerator
    Points,
    /// Exhaustive family means of S_k and of the point counts
    FamilyAvg,
    /// Beurling-Selberg coefficients and property report
    Bs,
    /// Both explicit formulas for one curve
    ExplicitCheck,
    /// Erdős–Turán discrepancy audit
    Discrepancy,
    /// Second moments and ⟨S^+S^-⟩
    Covariance,
    /// Raw and normalized moments up to --n
    Moments,
    /// Distribution of the normalized statistic at the automatic K
    Gaussian,
    /// Measure the audited constants and write the fixture
    Calibrate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Lpoly => "lpoly",
            Command::Zeta => "zeta",
            Command::Zeros => "zeros",
            Command::Points => "points",
            Command::FamilyAvg => "family-avg",
            Command::Bs => "bs",
            Command::ExplicitCheck => "explicit-check",
            Command::Discrepancy => "discrepancy",
            Command::Covariance => "covariance",
            Command::Moments => "moments",
            Command::Gaussian => "gaussian",
            Command::Calibrate => "calibrate",
        }
    }

    fn needs_curve(self) -> bool {
        matches!(
            self,
            Command::Lpoly
                | Command::Zeta
                | Command::Zeros
                | Command::Points
                | Command::ExplicitCheck
                | Command::Discrepancy
        )
    }

    fn needs_family(self) -> bool {
        matches!(
            self,
            Command::FamilyAvg | Command::Covariance | Command::Moments | Command::Gaussian
        )
    }

    fn writes_samples(self) -> bool {
        matches!(self, Command::Covariance | Command::Moments | Command::Gaussian)
    }
}

#[derive(Debug)]
pub enum CliError {
    /// bad input; exit 1
    Validation(String),
    /// a tolerance was breached; exit 2
    Numerical(String),
}

impl From<aszeta::Error> for CliError {
    fn from(e: aszeta::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(format!("io: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // help and version are not errors
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = RunConfig::resolve(cli.command, &cli.options).and_then(|cfg| commands::run(cli.command, &cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}
