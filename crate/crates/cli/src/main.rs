mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{RunArgs, RunConfig};

/// Dobrushin interdependence matrices, spectral-gap certificates and exact
/// inequality checks for finite Gibbs measures.
#[derive(Parser)]
#[command(name = "gibbsgap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interdependence matrix and spectral-gap certificate
    Certify(RunArgs),
    /// Exact spectral gap of the heat-bath generator against the certificate
    Spectrum(RunArgs),
    /// Per-site Lipschitz contraction of the heat-bath semigroup
    Contract(RunArgs),
    /// Jump-rate constants, contraction and Wasserstein decay
    Ips(RunArgs),
    /// Transportation, entropy and exponential-moment inequalities
    Transport(RunArgs),
    /// Closed-form model calculators, checked against exact matrices
    Bounds(RunArgs),
    /// Glauber-dynamics simulation and autocovariance envelope
    Simulate(RunArgs),
}

impl Command {
    fn split(&self) -> (&'static str, &RunArgs) {
        match self {
            Command::Certify(a) => ("certify", a),
            Command::Spectrum(a) => ("spectrum", a),
            Command::Contract(a) => ("contract", a),
            Command::Ips(a) => ("ips", a),
            Command::Transport(a) => ("transport", a),
            Command::Bounds(a) => ("bounds", a),
            Command::Simulate(a) => ("simulate", a),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (name, args) = cli.command.split();
    let result = RunConfig::resolve(name, args).and_then(|cfg| commands::run(&cfg));
    match result {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for path in &outcome.files {
                println!("wrote {}", path.display());
            }
            ExitCode::from(if outcome.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("gibbsgap {name}: {e}");
            ExitCode::from(2)
        }
    }
}
