//! `mvphi`: computations on multivariable (phi, Gamma)-module rings and the
//! verification suites.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use config::{Flags, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] mvphi_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use mvphi_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(E::InvalidParams(_) | E::Parse(_) | E::NotAUnit(_)) => 2,
            _ => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "mvphi", version, about = "Multivariable (phi, O_K^x)-module arithmetic")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// phi(Y_i) as a series in the Y-variables, with its congruence checks.
    PhiY {
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// a(Y_i) for a unit a of O_K, with its congruence checks.
    GammaY {
        /// The unit: one integer, or comma-separated O_K coordinates.
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        a: String,
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Teichmüller digits of the generators y_i of the embedding.
    Iota {
        /// Random elements used for the norm-comparison table.
        #[arg(long, default_value_t = 5)]
        samples: usize,
    },
    /// ||x||_s for an element read from a file or drawn at random.
    Norm {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Comma-separated radii.
        #[arg(long, default_value = "1,2,3")]
        s: String,
    },
    /// Components of x = sum_a a phi(g_a).
    Decompose {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Etaleness and the integral bound of a phi-module.
    Etale {
        /// Module JSON; a rank-one unramified character when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Comma-separated O_E coordinates of the character's eigenvalue.
        #[arg(long)]
        lambda: Option<String>,
    },
    /// Overconvergence certificate for a phi-module and base change U.
    OcCert {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        lambda: Option<String>,
        /// Matrix of elements as JSON; identity when omitted.
        #[arg(long)]
        basis: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        s: i64,
        #[arg(long)]
        s_max: Option<i64>,
    },
    /// Run a verification suite and report per assertion.
    Check,
}

/// Command output and whether its checks passed.
pub struct Outcome {
    pub json: serde_json::Value,
    pub pass: bool,
}

impl Outcome {
    pub fn new<T: Serialize>(value: &T, pass: bool) -> Result<Self, CliError> {
        let json = serde_json::to_value(value).map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(Outcome { json, pass })
    }
}

fn run(cli: Cli) -> Result<(Outcome, Option<PathBuf>), CliError> {
    let cfg = RunConfig::resolve(&cli.flags)?;
    let outcome = match cli.cmd {
        Cmd::PhiY { index } => commands::phi_y(&cfg, index)?,
        Cmd::GammaY { a, index } => commands::gamma_y(&cfg, &a, index)?,
        Cmd::Iota { samples } => commands::iota(&cfg, samples)?,
        Cmd::Norm { input, s } => commands::norm(&cfg, input.as_deref(), &s)?,
        Cmd::Decompose { input } => commands::decompose(&cfg, input.as_deref())?,
        Cmd::Etale { input, lambda } => commands::etale(&cfg, input.as_deref(), lambda.as_deref())?,
        Cmd::OcCert {
            input,
            lambda,
            basis,
            s,
            s_max,
        } => commands::oc_cert(
            &cfg,
            input.as_deref(),
            lambda.as_deref(),
            basis.as_deref(),
            s,
            s_max.unwrap_or(s + 4),
        )?,
        Cmd::Check => commands::check(&cfg)?,
    };
    Ok((outcome, cfg.out))
}

fn emit(outcome: &Outcome, out: Option<PathBuf>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(&outcome.json).map_err(|e| CliError::Usage(e.to_string()))?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli).and_then(|(o, out)| emit(&o, out).map(|_| o.pass)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("mvphi: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
