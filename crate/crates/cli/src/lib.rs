//! Command-line front end: a declarative TOML run configuration, per-key
//! overrides, and one subcommand per benchmark stage.

pub mod backend;
pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "elicit",
    version,
    about = "Build and score the commentary-retrieval benchmark"
)]
pub struct Cli {
    /// Run configuration file.
    #[arg(long, global = true, default_value = "elicit.toml", value_name = "FILE")]
    pub config: PathBuf,
    /// Override one configuration key, e.g. --set pool.size=100. TOML value
    /// syntax; repeatable, later wins.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Turn raw commentary into question-answer pairs, split files, and the
    /// surviving comment corpus.
    Convert,
    /// Train the hashing encoder on the train split and write a checkpoint.
    Train,
    /// Build one fixed-size retrieval pool per segment of the chosen split.
    BuildPools,
    /// Score a submission file against the built pools.
    Evaluate {
        /// Submission: one JSON line {"segment_id", "question"} per pool.
        submission: PathBuf,
    },
    /// Score the reference runs that bracket submissions.
    Baseline {
        /// Rank the real questions with the configured encoder.
        #[arg(long)]
        gold: bool,
        /// Permute each pool with no text involved.
        #[arg(long)]
        random: bool,
    },
    /// Compare encoders by ranking each question against all answers.
    RetrieverCheck,
    /// Pretty-print a stored metrics report.
    Report {
        /// Report file written by evaluate, baseline, or retriever-check.
        file: PathBuf,
    },
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let config = RunConfig::load(&cli.config, &cli.overrides)?;
    match &cli.command {
        Command::Convert => commands::convert::run(&config),
        Command::Train => commands::train::run(&config),
        Command::BuildPools => commands::pools::run(&config),
        Command::Evaluate { submission } => commands::evaluate::run(&config, submission),
        Command::Baseline { gold, random } => commands::baseline::run(&config, *gold, *random),
        Command::RetrieverCheck => commands::check::run(&config),
        Command::Report { file } => commands::report::run(&config, file),
    }
}
