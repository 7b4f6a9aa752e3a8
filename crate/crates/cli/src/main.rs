//! `mollify-lab`: runs the mollifier, commutator and energy checks and
//! writes reproducible JSON/CSV reports.
//!
//! Exit status: 0 when every check passes, 1 when one fails, 2 for usage
//! and configuration errors.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod report;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, Command};

fn init_threads() -> anyhow::Result<()> {
    if let Ok(raw) = std::env::var("MOLLIFY_LAB_THREADS") {
        let n: usize = raw.trim().parse().map_err(|_| anyhow::anyhow!("MOLLIFY_LAB_THREADS={raw:?} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    init_threads()?;
    match &cli.command {
        Command::Lemmas(a) => commands::lemmas(a),
        Command::Commutator(a) => commands::commutator(a),
        Command::Energy(a) => commands::energy(a),
        Command::Exponents(a) => commands::exponents(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
