//! `ruelle`: run a configured task, or a named builtin, and write CSV artifacts.

mod builtins;
mod config;
mod output;
mod tasks;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ruelle_core::ErrorKind;

use crate::config::RunConfig;

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub reason: String,
}

impl CliError {
    pub fn new(kind: ErrorKind, reason: impl Into<String>) -> Self {
        CliError {
            kind,
            reason: reason.into(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self.kind {
            ErrorKind::Config => 1,
            ErrorKind::Numeric => 2,
            ErrorKind::Resource => 3,
            ErrorKind::Precondition => 4,
        }
    }

    fn kind_name(&self) -> &'static str {
        match self.kind {
            ErrorKind::Config => "config",
            ErrorKind::Numeric => "numeric",
            ErrorKind::Resource => "resource",
            ErrorKind::Precondition => "precondition",
        }
    }
}

impl From<ruelle_core::Error> for CliError {
    fn from(e: ruelle_core::Error) -> Self {
        CliError::new(e.kind(), e.to_string())
    }
}

/// Thread count for the parallel parts of the solvers.
const THREADS_VAR: &str = "RUELLE_THREADS";

#[derive(Parser)]
#[command(name = "ruelle", version, about = "Transfer operators and renewal asymptotics on truncated Markov shifts")]
struct Cli {
    /// List the builtin example systems and exit.
    #[arg(long)]
    list_builtins: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the task described by a TOML config file.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a builtin example system.
    Builtin {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the expanded config instead of running it.
        #[arg(long)]
        emit_config: bool,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::new(ErrorKind::Config, format!("{THREADS_VAR} must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::new(ErrorKind::Resource, e.to_string()))
}

fn execute(cfg: &RunConfig, base: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let dir = out.unwrap_or_else(|| base.join(&cfg.output.dir));
    let result = tasks::run_task(cfg, base)?;
    for path in output::write_all(&dir, cfg, &result)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.list_builtins {
        for (name, what) in builtins::BUILTINS {
            println!("{name:<22} {what}");
        }
        return Ok(());
    }
    configure_threads()?;
    match cli.command {
        None => Err(CliError::new(ErrorKind::Config, "no command given; try --help")),
        Some(Command::Run { config, out }) => {
            let cfg = RunConfig::load(&config)?;
            let base = config.parent().map(Path::to_path_buf).unwrap_or_default();
            execute(&cfg, &base, out)
        }
        Some(Command::Builtin { name, out, emit_config }) => {
            let cfg = builtins::builtin(&name)?;
            if emit_config {
                print!("{}", cfg.to_toml());
                return Ok(());
            }
            execute(&cfg, Path::new("."), out)
        }
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: kind={} reason={:?}", e.kind_name(), e.reason);
            ExitCode::from(e.exit_code())
        }
    }
}
