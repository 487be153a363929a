//! `spinsym`: batch sweeps over spin symbol correspondences.
//!
//! Every subcommand produces a CSV table and a JSON summary. With
//! `--out PREFIX` both are written to `PREFIX.csv` and `PREFIX.json`;
//! otherwise the table (or, with `--json`, the summary) goes to stdout.
//!
//! Exit status: 0 on success (negative verdicts included), 2 on a
//! configuration error, 3 when a family has a vanishing characteristic
//! number where an inverse is needed, 1 on anything else.

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use commands::*;
use config::{parse_precision, ConfigError};
use output::Sink;

#[derive(Parser, Debug)]
#[command(name = "spinsym", version, about = "Sweeps over symbol correspondences of spin systems")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Serialize)]
struct Common {
    /// Write PREFIX.csv and PREFIX.json instead of printing.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the JSON summary instead of the CSV table.
    #[arg(long, global = true)]
    json: bool,
    /// exact, float or auto (exact up to n = 200).
    #[arg(long, global = true, default_value = "auto")]
    precision: String,
    /// Seed for randomized inputs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for the internal sweeps.
    #[arg(long, global = true, env = "SPINSYM_THREADS")]
    #[serde(skip)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Characteristic numbers c_l^n over a grid of levels.
    Charnums(CharnumsArgs),
    /// Isometric / mapping-positive / positive-dual and limit verdicts.
    Classify(ClassifyArgs),
    /// Samples of the Π-distribution ρ_k on [−1, 1].
    Rho(RhoArgs),
    /// Mean and variance of ρ_{k_n} along an r-convergent sequence.
    Moments(MomentsArgs),
    /// Localization errors |∫f ρ_{k_n} − f(z0)|.
    Localize(LocalizeArgs),
    /// Scaled diagonal Clebsch-Gordan coefficients against P_l(1−2r).
    Edmonds(EdmondsArgs),
    /// Localization against Runge poles around a Bernstein ellipse.
    MuAnalytic(MuAnalyticArgs),
    /// Polynomial bound constants for |c_l^n|.
    BoundCheck(BoundCheckArgs),
    /// Norms of the quantizations of f.
    QuantizeNorms(QuantizeNormsArgs),
    /// ⟨Π_{k_n}|F̃_n⟩ along an r-convergent sequence.
    Expectation(ExpectationArgs),
    /// Twisted product of two spherical harmonics.
    Twisted(TwistedArgs),
    /// Residuals of the Poisson-type conditions.
    PoissonDiagnostic(PoissonArgs),
    /// Nested Fourier-coefficient states and their convergence.
    GroundSim(GroundSimArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Charnums(_) => "charnums",
            Command::Classify(_) => "classify",
            Command::Rho(_) => "rho",
            Command::Moments(_) => "moments",
            Command::Localize(_) => "localize",
            Command::Edmonds(_) => "edmonds",
            Command::MuAnalytic(_) => "mu-analytic",
            Command::BoundCheck(_) => "bound-check",
            Command::QuantizeNorms(_) => "quantize-norms",
            Command::Expectation(_) => "expectation",
            Command::Twisted(_) => "twisted",
            Command::PoissonDiagnostic(_) => "poisson-diagnostic",
            Command::GroundSim(_) => "ground-sim",
        }
    }

    fn args_json(&self) -> serde_json::Value {
        let v = match self {
            Command::Charnums(a) => serde_json::to_value(a),
            Command::Classify(a) => serde_json::to_value(a),
            Command::Rho(a) => serde_json::to_value(a),
            Command::Moments(a) => serde_json::to_value(a),
            Command::Localize(a) => serde_json::to_value(a),
            Command::Edmonds(a) => serde_json::to_value(a),
            Command::MuAnalytic(a) => serde_json::to_value(a),
            Command::BoundCheck(a) => serde_json::to_value(a),
            Command::QuantizeNorms(a) => serde_json::to_value(a),
            Command::Expectation(a) => serde_json::to_value(a),
            Command::Twisted(a) => serde_json::to_value(a),
            Command::PoissonDiagnostic(a) => serde_json::to_value(a),
            Command::GroundSim(a) => serde_json::to_value(a),
        };
        v.expect("arguments serialize")
    }
}

/// Why a run stopped.
#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Library(spinsym::Error),
    Output(std::io::Error),
}

impl RunError {
    fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Library(spinsym::Error::Domain(_) | spinsym::Error::Invalid(_)) => 2,
            RunError::Library(spinsym::Error::Singular { .. }) => 3,
            RunError::Library(_) | RunError::Output(_) => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "configuration error: {e}"),
            RunError::Library(e) => write!(f, "{e}"),
            RunError::Output(e) => write!(f, "writing output: {e}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<spinsym::Error> for RunError {
    fn from(e: spinsym::Error) -> Self {
        RunError::Library(e)
    }
}

fn run(cli: &Cli) -> Result<(), RunError> {
    if let Some(threads) = cli.common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| ConfigError(format!("thread pool: {e}")))?;
    }
    let precision = parse_precision(&cli.common.precision)?;
    let seed = cli.common.seed;
    let report = match &cli.command {
        Command::Charnums(a) => charnums(a, precision)?,
        Command::Classify(a) => classify_cmd(a)?,
        Command::Rho(a) => rho(a)?,
        Command::Moments(a) => moments_cmd(a)?,
        Command::Localize(a) => localize(a, precision)?,
        Command::Edmonds(a) => edmonds(a)?,
        Command::MuAnalytic(a) => mu_analytic(a)?,
        Command::BoundCheck(a) => bound(a)?,
        Command::QuantizeNorms(a) => quantize_norms(a)?,
        Command::Expectation(a) => expectation(a)?,
        Command::Twisted(a) => twisted(a)?,
        Command::PoissonDiagnostic(a) => poisson(a)?,
        Command::GroundSim(a) => ground_sim(a, precision, seed)?,
    };
    let config = json!({ "common": &cli.common, "args": cli.command.args_json() });
    let sink = match (&cli.common.out, cli.common.json) {
        (Some(prefix), _) => Sink::Files(prefix.clone()),
        (None, false) => Sink::StdoutCsv,
        (None, true) => Sink::StdoutJson,
    };
    sink.emit(&report, cli.command.name(), &config).map_err(RunError::Output)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spinsym: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
