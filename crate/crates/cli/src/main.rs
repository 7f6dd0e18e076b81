mod commands;
mod config;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use esg_core::Error;
use serde::Serialize;

use commands::{DotArgs, MetricsArgs, QueryArgs};
use config::BuildArgs;

/// Build equivalence set graphs from N-Triples and measure them.
#[derive(Parser, Debug)]
#[command(name = "esg", version)]
struct Cli {
    /// Repeat for more log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the property and/or class ESG and export it.
    Build(Box<BuildArgs>),
    /// Compute the metrics report of an exported ESG.
    Metrics(MetricsArgs),
    /// Look up a term in an exported ESG.
    Query(QueryArgs),
    /// Write an exported ESG as Graphviz DOT.
    ExportDot(DotArgs),
}

/// A failed command, reported on stderr as one JSON object.
#[derive(Debug, Serialize)]
pub struct Failure {
    error: String,
    message: String,
    #[serde(skip)]
    internal: bool,
}

impl Failure {
    pub fn user(kind: &str, message: impl Into<String>) -> Self {
        Failure {
            error: kind.into(),
            message: message.into(),
            internal: false,
        }
    }

    fn exit_code(&self) -> u8 {
        if self.internal {
            2
        } else {
            1
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (kind, internal) = match &e {
            Error::Io(_) => ("io", false),
            Error::Parse { .. } => ("parse", false),
            Error::Config(_) => ("config", false),
            Error::UnknownEntity(_) => ("not_found", false),
            Error::Json(_) => ("parse", false),
            Error::UnissuedTermId(_) | Error::SelfMerge(_) | Error::UnknownSet(_) => {
                ("invariant", true)
            }
            Error::Stalled { .. } => ("stalled", true),
            Error::Storage(_) => ("storage", true),
        };
        Failure {
            error: kind.into(),
            message: e.to_string(),
            internal,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure {
            error: "internal".into(),
            message: e.to_string(),
            internal: true,
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Build(args) => commands::build(&args.resolve()?),
        Command::Metrics(args) => commands::metrics(&args),
        Command::Query(args) => {
            let text = commands::query(&args)?;
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
        Command::ExportDot(args) => commands::export_dot(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let json = serde_json::to_string(&f).unwrap_or_else(|_| f.message.clone());
            eprintln!("{json}");
            ExitCode::from(f.exit_code())
        }
    }
}
