//! `optomech` command-line front end.
//!
//! Exit codes: 0 success, 1 configuration or validation error, 2 a check or
//! tolerance failed.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use commands::{Context, DetuningSign};
use config::RunConfig;
use output::Format;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("check failed: {0}")]
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "optomech",
    version,
    about = "Quantum noise spectra of a detuned-cavity readout of a mechanical oscillator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration; built-in defaults when omitted.
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write the table here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Overrides `sim.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Which detuning signs to evaluate, with |Δ| from the config.
    #[arg(long, value_enum, default_value = "both", allow_hyphen_values = true)]
    detuning_sign: DetuningSign,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Output-spectrum decomposition for ±Δ.
    Spectrum(Common),
    /// Sideband areas and asymmetry over a list of occupancies.
    Asymmetry(Common),
    /// Force-noise budget and quantum limits.
    Force(Common),
    /// Scattering rates and the scattering-picture spectrum.
    Scattering(Common),
    /// Time-domain simulation compared with the analytic output spectrum.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Also write the per-bin PSD table here (overrides `oracle.psd_output`).
        #[arg(long)]
        psd_output: Option<PathBuf>,
    },
    /// Invariant suite; exits 2 if any check fails.
    Check {
        #[command(flatten)]
        common: Common,
        /// Evaluates the correlation term with the opposite detuning sign,
        /// which must make the correlation check fail.
        #[arg(long)]
        flip_correlation_sign: bool,
    },
}

fn context(common: &Common) -> Result<Context, CliError> {
    Ok(Context {
        config: RunConfig::load(common.config.as_deref())?,
        sign: common.detuning_sign,
        seed: common.seed,
    })
}

fn run(cli: Cli) -> Result<Vec<String>, CliError> {
    let (common, outcome) = match &cli.command {
        Command::Spectrum(c) => (c, commands::spectrum(&context(c)?)?),
        Command::Asymmetry(c) => (c, commands::asymmetry(&context(c)?)?),
        Command::Force(c) => (c, commands::force(&context(c)?)?),
        Command::Scattering(c) => (c, commands::scattering(&context(c)?)?),
        Command::Oracle { common, psd_output } => {
            let ctx = context(common)?;
            let (outcome, dump) = commands::oracle(&ctx, psd_output.clone())?;
            if let Some(dump) = dump {
                let path = psd_output.clone().or(ctx.config.oracle.psd_output.clone());
                dump.emit(common.format, path.as_deref())?;
            }
            (common, outcome)
        }
        Command::Check {
            common,
            flip_correlation_sign,
        } => (
            common,
            commands::check(&context(common)?, *flip_correlation_sign)?,
        ),
    };
    outcome
        .output
        .emit(common.format, common.output.as_deref())?;
    Ok(outcome.failures)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => {
            for f in failures {
                eprintln!("FAIL {f}");
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
