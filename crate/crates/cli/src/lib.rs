//! Command-line front end for the `rhb` harmonic balance library.
//!
//! Every command reads a TOML [`config::RunConfig`], writes CSV and JSON
//! files into an output directory and reports an [`Outcome`]. Output files
//! start with the resolved configuration, so a run can be reproduced from
//! any of its files.

pub mod commands;
pub mod config;
pub mod model;
pub mod output;

use config::{Command, ConfigError, RunConfig};
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    /// Newton failed, no branch was found or a numerical check failed.
    Numerical(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

/// Files written by a command and whether its numerical goal was met.
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// `Some(reason)` when the command finished but did not succeed.
    pub failure: Option<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failure.is_some() {
            2
        } else {
            0
        }
    }
}

/// A parsed and resolved run.
pub struct Context {
    pub command: Command,
    pub config: RunConfig,
    /// Serialised `config`, embedded in every output file.
    pub config_text: String,
    pub out_dir: PathBuf,
}

impl Context {
    pub fn new(
        command: Command,
        text: &str,
        out_dir: &Path,
        seed: Option<u64>,
    ) -> Result<Self, CliError> {
        let config = RunConfig::parse(text, command)?.resolved(command, seed);
        let config_text = config.to_toml();
        Ok(Self {
            command,
            config,
            config_text,
            out_dir: out_dir.to_path_buf(),
        })
    }
}

/// Parses `text`, runs `command` and writes its files below `out_dir`.
pub fn run(
    command: Command,
    text: &str,
    out_dir: &Path,
    seed: Option<u64>,
) -> Result<Outcome, CliError> {
    let ctx = Context::new(command, text, out_dir, seed)?;
    std::fs::create_dir_all(&ctx.out_dir)?;
    match command {
        Command::Solve => commands::solve::run(&ctx),
        Command::Sweep => commands::sweep::run(&ctx),
        Command::Montecarlo => commands::montecarlo::run(&ctx),
        Command::Aliasing => commands::aliasing::run(&ctx),
        Command::IdentityCheck => commands::identity::run(&ctx),
        Command::Propagate => commands::propagate::run(&ctx),
    }
}
