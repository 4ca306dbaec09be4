//! The `bethe` command-line driver: TOML config in, JSON or table report out.

mod commands;
pub mod config;
pub mod report;
pub mod verify;

use std::fmt;
use std::path::Path;

pub use config::{parse_config, ConfigError, Method, OutputFormat, RunConfig};
pub use report::{Comparison, ErrorReport, Report, Section, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    /// Solve the Bethe equations and check every root set.
    Solve,
    /// Evaluate the on-shell/off-shell scalar product with several methods.
    Scalar,
    /// Evaluate the on-shell norm as the coinciding-argument limit.
    Norm,
    /// Run the full invariant suite.
    Verify,
    /// Time the determinant, residue-sum and action methods.
    Bench,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Solve => "solve",
            Command::Scalar => "scalar",
            Command::Norm => "norm",
            Command::Verify => "verify",
            Command::Bench => "bench",
        })
    }
}

/// Command-line overrides applied on top of the config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExecOptions {
    pub methods: Option<Vec<Method>>,
    pub unchecked: bool,
}

/// Reads, parses and validates a config file.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Validation {
        key: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config(&text)
}

/// Runs `command` on a validated config.
pub fn execute(cfg: &RunConfig, command: Command, opts: &ExecOptions) -> crate::Result<Report> {
    let sections = match command {
        Command::Solve => commands::solve(cfg)?,
        Command::Scalar => commands::scalar(cfg, opts)?,
        Command::Norm => commands::norm(cfg, opts)?,
        Command::Verify => verify::run_verify(cfg)?,
        Command::Bench => commands::bench(cfg)?,
    };
    Ok(Report::new(&command.to_string(), cfg, sections))
}

/// Renders a report in the configured format.
pub fn render(report: &Report, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Table => report.to_table(),
    }
}
