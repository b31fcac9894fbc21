//! Command-line front end for `nrdr-core`: data generation, embedding,
//! diagnostics and a nearest-neighbor classification benchmark.

pub mod args;
pub mod classify;
pub mod commands;
pub mod config;
pub mod error;

pub use args::{Cli, Command};
pub use error::CliError;

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    match &cli.command {
        Command::Generate(a) => {
            let out = commands::cmd_generate(a)?;
            log::info!("wrote {}", out.display());
        }
        Command::Embed(a) => {
            commands::cmd_embed(a)?;
        }
        Command::Diagnose(a) => {
            commands::cmd_diagnose(a)?;
        }
        Command::Classify(a) => {
            commands::cmd_classify(a)?;
        }
    }
    Ok(())
}
