//! Command line front end.
//!
//! ```text
//! fadg <command> [config-file] [--key value]...
//! ```
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 I/O.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::RunConfig;

use crate::Result;

#[derive(Debug, Parser)]
#[command(name = "fadg", version, about = "Field-aligned DG eigensolver for periodic anisotropic wave problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Band spectrum of one case, written to spectrum.csv.
    Solve(RunArgs),
    /// Max band error over a sequence of meshes, written to convergence.csv.
    Convergence(RunArgs),
    /// Band errors of two layouts at equal DoF, written to compare.csv.
    Compare(RunArgs),
    /// Spectra over the flux surfaces in `surfaces`, written to sweep.csv.
    Sweep(RunArgs),
    /// Analytic constant-coefficient spectrum, written to exact_spectrum.csv.
    ExactSpectrum(RunArgs),
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// Optional `key = value` file followed by `--key value` overrides.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "ARGS")]
    pub args: Vec<String>,
}

impl RunArgs {
    /// Configuration file (if any) with the overrides applied.
    pub fn config(&self) -> Result<RunConfig> {
        let (mut cfg, rest) = match self.args.first() {
            Some(first) if !first.starts_with("--") => {
                (RunConfig::load(&PathBuf::from(first))?, &self.args[1..])
            }
            _ => (RunConfig::default(), &self.args[..]),
        };
        cfg.apply_overrides(rest)?;
        Ok(cfg)
    }
}

/// Runs one parsed command line; returns the written output file.
pub fn run(cli: &Cli) -> Result<PathBuf> {
    let (args, f): (&RunArgs, fn(&RunConfig) -> Result<PathBuf>) = match &cli.command {
        Command::Solve(a) => (a, commands::solve),
        Command::Convergence(a) => (a, commands::convergence),
        Command::Compare(a) => (a, commands::compare),
        Command::Sweep(a) => (a, commands::sweep),
        Command::ExactSpectrum(a) => (a, commands::exact),
    };
    let cfg = args.config()?;
    for line in cfg.to_text().lines() {
        log::info!("config: {line}");
    }
    f(&cfg)
}

/// Process entry point; returns the exit code.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(path) => {
            println!("{}", path.display());
            0
        }
        Err(e) => {
            log::error!("{e}");
            e.exit_code()
        }
    }
}
