//! Command-line driver for `stratglm`.
//!
//! Every subcommand reads one flat config file and writes into one output
//! directory together with a [`manifest::RunManifest`].

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

use std::path::PathBuf;

pub use error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Synth,
    Fit,
    Eval,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Synth => "synth",
            Command::Fit => "fit",
            Command::Eval => "eval",
            Command::Report => "report",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub config: PathBuf,
    /// Overrides `output.dir` from the config.
    pub out: Option<PathBuf>,
    pub threads: usize,
    pub allow_fallback: bool,
}

/// Runs one subcommand on a dedicated thread pool of `opts.threads` workers.
pub fn run(command: Command, opts: &Options) -> Result<(), CliError> {
    let cfg = config::Config::load(&opts.config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} threads: {e}", opts.threads)))?;
    pool.install(|| match command {
        Command::Synth => commands::synth::run(&cfg, opts),
        Command::Fit => commands::fit::run(&cfg, opts),
        Command::Eval => commands::eval::run(&cfg, opts),
        Command::Report => commands::report::run(&cfg, opts),
    })
}
