//! `dirand`: certificate inspection, finite-size rates, protocol simulation
//! and extraction.
//!
//! Exit codes: 0 success, 2 input or validation error, 3 nothing extractable.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dirand::{RandType, ZeroClass};

use config::{parse_count, parse_counts, parse_grid, Counts, Grid};

#[derive(Debug, Parser)]
#[command(name = "dirand", version, about = "Device-independent randomness expansion with zero-probability constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load and audit a dual certificate, then print its min-tradeoff function.
    #[command(args_override_self = true)]
    Certify(CertifyArgs),
    /// Optimize the finite rate over (beta, nu', gamma) grids for each n.
    #[command(args_override_self = true)]
    Rate(RateArgs),
    /// Run the protocol against the honest strategy of a class.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// Hash raw bits with a Toeplitz extractor.
    #[command(args_override_self = true)]
    Extract(ExtractArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Flat `key = value` file; command-line flags override it.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Machine-readable JSON on stdout.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct ProtocolArgs {
    /// Zero-constraint class: chsh, 1, 2a, 2b, 2b_swap, 2c, 3a, 3b.
    #[arg(long)]
    class: Option<ZeroClass>,
    /// Randomness type: local, global or blind.
    #[arg(long)]
    rand_type: Option<RandType>,
    /// Testing probability.
    #[arg(long)]
    gamma: Option<f64>,
    /// Expected winning probability.
    #[arg(long)]
    w_exp: Option<f64>,
    /// Tolerance on the winning probability.
    #[arg(long)]
    w_tol: Option<f64>,
    /// Tolerance on each zero-probability constraint.
    #[arg(long)]
    eta_z: Option<f64>,
    /// Hoeffding slack for the zero constraints; defaults to eta_z / 2.
    #[arg(long)]
    eta_z_prime: Option<f64>,
    /// Smoothing parameter.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Extractor error.
    #[arg(long)]
    epsilon_ext: Option<f64>,
    /// Output alphabet dimension per round (2, or 4 for global randomness).
    #[arg(long)]
    d_k: Option<u32>,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    /// Certificate JSON file.
    #[arg(long, value_name = "FILE")]
    cert: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct RateArgs {
    /// Certificate JSON file.
    #[arg(long, value_name = "FILE")]
    cert: PathBuf,
    /// Round counts, comma separated, e.g. `1e5,1e6,1e7`.
    #[arg(long, value_parser = parse_counts)]
    n: Counts,
    #[command(flatten)]
    protocol: ProtocolArgs,
    /// `log:lo:hi:k`, `lin:lo:hi:k` or a comma list. Default `log:1e-6:0.9:50`.
    #[arg(long, value_parser = parse_grid)]
    beta_grid: Option<Grid>,
    /// Crossover points nu'. Default `lin:0:1:21`.
    #[arg(long, value_parser = parse_grid)]
    nu_grid: Option<Grid>,
    /// Testing probabilities. Default `--gamma` if given, else `log:1e-3:1:31`.
    #[arg(long, value_parser = parse_grid)]
    gamma_grid: Option<Grid>,
    /// Write the CSV here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Also dump every grid point of every n as CSV.
    #[arg(long, value_name = "FILE")]
    heatmap: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Rounds per trial, e.g. `1e5`.
    #[arg(long, value_parser = parse_count)]
    n: u64,
    #[command(flatten)]
    protocol: ProtocolArgs,
    /// Independent trials.
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for the summary, per-trial CSV, first-trial transcript and raw bits.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    /// Raw bit file (u64 length header, packed bits).
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Seed bit file; only its first `n_in + l - 1` bits are used.
    #[arg(long, value_name = "FILE")]
    seed_file: PathBuf,
    /// Smooth min-entropy of the input in bits.
    #[arg(long)]
    k_ext: f64,
    #[arg(long, default_value_t = dirand::geat::DEFAULT_EPSILON_EXT)]
    epsilon_ext: f64,
    /// Output bit file.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv = match config::expand_args(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(argv);
    let result = match cli.command {
        Command::Certify(a) => commands::certify(&a),
        Command::Rate(a) => commands::rate(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Extract(a) => commands::extract(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
