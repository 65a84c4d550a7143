use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stratglm_cli::{run, Command, Options};

#[derive(Parser)]
#[command(name = "stratglm", version, about = "Penalized logistic models for stratified cohorts")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic cohort from a preset
    Synth(Common),
    /// Fit one model with cross-validation
    Fit(Common),
    /// Compare fitted models on a shared test set
    Eval(Common),
    /// Run synth, fit and eval for every data configuration and write the tables
    Report(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `section.key = value` config file
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.dir`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; outputs do not depend on this
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Score groups unseen in training with the overall model
    #[arg(long)]
    allow_fallback: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (command, c) = match cli.command {
        Cmd::Synth(c) => (Command::Synth, c),
        Cmd::Fit(c) => (Command::Fit, c),
        Cmd::Eval(c) => (Command::Eval, c),
        Cmd::Report(c) => (Command::Report, c),
    };
    let opts = Options { config: c.config, out: c.out, threads: c.threads, allow_fallback: c.allow_fallback };
    match run(command, &opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stratglm {}: {e}", command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
