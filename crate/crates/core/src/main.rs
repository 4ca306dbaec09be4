use std::path::PathBuf;
use std::process::ExitCode;

use bethe::cli::{self, Command, ErrorReport, ExecOptions, Method, OutputFormat};
use clap::Parser;

/// Scalar products of Bethe vectors for the gl(2) XXX chain.
///
/// Exit status: 0 when every check passes, 1 when a check fails, 2 on error.
#[derive(Debug, Parser)]
#[command(name = "bethe", version)]
struct Args {
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Write the report here instead of the configured path or stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Comma-separated methods for `scalar`: det, hny:M, sum, action, oracle.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Skip the on-shell check of the first argument.
    #[arg(long)]
    unchecked: bool,
    /// Report format, overriding the config.
    #[arg(long, value_parser = ["json", "table"])]
    format: Option<String>,
}

fn fail(kind: &str, message: impl ToString) -> ExitCode {
    print!("{}", ErrorReport::new(kind, message.to_string()).to_json());
    ExitCode::from(2)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("BETHE_LOG")).init();
    let args = Args::parse();

    if let Some(jobs) = args.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            return fail("invalid_argument", e);
        }
    }
    let cfg = match cli::load_config(&args.config) {
        Ok(cfg) => cfg,
        Err(e) => return fail("config", e),
    };
    let methods = match args.methods.as_ref().map(|ms| ms.iter().map(|m| Method::parse(m)).collect()) {
        Some(Err(e)) => return fail("config", e),
        Some(Ok(ms)) => Some(ms),
        None => None,
    };
    let opts = ExecOptions { methods, unchecked: args.unchecked };
    let report = match cli::execute(&cfg, args.command, &opts) {
        Ok(report) => report,
        Err(e) => return fail(e.kind(), e),
    };
    let format = match args.format.as_deref() {
        Some("table") => OutputFormat::Table,
        Some(_) => OutputFormat::Json,
        None => cfg.output.format,
    };
    let text = cli::render(&report, format);
    match args.output.or_else(|| cfg.output.path.as_ref().map(PathBuf::from)) {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, &text) {
                return fail("io", format!("{}: {e}", path.display()));
            }
        }
        None => print!("{text}"),
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
