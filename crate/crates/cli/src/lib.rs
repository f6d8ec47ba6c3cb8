//! Batch front end for the narrow escape toolkit: configuration, the five
//! subcommands and their persistent outputs.

// `!(x > 0)` style checks are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use serde::Serialize;

pub use commands::RunOptions;
pub use config::ExperimentConfig;
pub use output::{CommandOutput, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error:\n{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] nek_core::NekError),
    #[error("{}: {}", .0.display(), .1)]
    Io(PathBuf, std::io::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Output(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Constants,
    Operators,
    Compare,
    Kernel,
    McCalibrate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Constants => "constants",
            Self::Operators => "operators",
            Self::Compare => "compare",
            Self::Kernel => "kernel",
            Self::McCalibrate => "mc-calibrate",
        }
    }
}

pub fn run(command: Command, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<CommandOutput, CliError> {
    match command {
        Command::Constants => commands::constants(cfg, opts),
        Command::Operators => commands::operators(cfg, opts),
        Command::Compare => commands::compare(cfg, opts),
        Command::Kernel => commands::kernel(cfg, opts),
        Command::McCalibrate => commands::mc_calibrate(cfg, opts),
    }
}

#[derive(Serialize)]
struct HashInput<'a> {
    command: &'static str,
    config: &'a ExperimentConfig,
    sign_convention: &'static str,
    order_doubled: bool,
}

/// SHA-256 of everything that determines the tables of a run. Thread counts and
/// output locations are deliberately left out.
pub fn config_hash(command: Command, cfg: &ExperimentConfig, opts: &RunOptions) -> String {
    let input = HashInput {
        command: command.name(),
        config: cfg,
        sign_convention: opts.convention.name(),
        order_doubled: opts.order_doubled,
    };
    output::sha256_hex(&serde_json::to_vec(&input).expect("configuration serialises"))
}
