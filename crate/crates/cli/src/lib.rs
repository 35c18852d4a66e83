//! Command-line front end for the `qcrit` library.

pub mod args;
mod commands;
pub mod parse;
pub mod table;

use std::fmt;

pub use commands::run_command;

/// Environment variable capping worker threads; `0` or unset means one per core.
pub const THREADS_ENV: &str = "ENSEMBLE_QCRIT_THREADS";

#[derive(Debug)]
pub enum CliError {
    /// Flag combination or value rejected before any computation.
    Usage(String),
    Domain(qcrit::Error),
    Io(std::io::Error),
    /// The command ran but reported failures (e.g. a failed self-check).
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) | CliError::Io(_) | CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Domain(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Failed(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<qcrit::Error> for CliError {
    fn from(e: qcrit::Error) -> Self {
        CliError::Domain(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Sizes the global rayon pool from [`THREADS_ENV`].
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{THREADS_ENV}=`{raw}` is not a non-negative integer")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("{THREADS_ENV}: {e}")))?;
    }
    Ok(())
}

/// Runs a parsed command and writes its output. Failed self-checks still
/// write their report before the error is returned.
pub fn execute(cli: &args::Cli) -> Result<(), CliError> {
    let (table, status) = run_command(&cli.command)?;
    for note in &table.notes {
        eprintln!("{note}");
    }
    let text = table.render(cli.format);
    match &cli.out {
        Some(path) => table::write_atomic(path, &text)?,
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    status
}
