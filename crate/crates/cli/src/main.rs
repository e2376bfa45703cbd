mod cli;
mod commands;
mod config;
mod failure;
mod manifest;
mod model;
mod table;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command, GmcAction};
use failure::Failure;

fn threads(n: Option<usize>) -> Result<(), Failure> {
    match n {
        None => Ok(()),
        Some(0) => Err(Failure::usage("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::runtime(e.to_string())),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Simulate(a) => {
            threads(a.common.threads)?;
            commands::cmd_simulate(a)
        }
        Command::Spectrum(a) => {
            threads(a.common.threads)?;
            commands::cmd_spectrum(a)
        }
        Command::Bootstrap(a) => {
            threads(a.common.threads)?;
            commands::cmd_bootstrap(a)
        }
        Command::Gmc(g) => match &g.action {
            GmcAction::Decay(a) => {
                threads(a.common.threads)?;
                commands::cmd_gmc_decay(a)
            }
            GmcAction::GarchCondition(a) => {
                threads(a.common.threads)?;
                commands::cmd_garch_condition(a)
            }
            GmcAction::Contraction(a) => {
                threads(a.common.threads)?;
                commands::cmd_contraction(a)
            }
        },
        Command::Verify(a) => {
            threads(a.common.threads)?;
            commands::cmd_verify(a)
        }
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors and 0 for --help
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nls: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
