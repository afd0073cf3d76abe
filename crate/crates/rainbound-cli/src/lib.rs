//! Command-line front end: configuration, series ingestion, CSV/JSON
//! emission and the subcommand runners.

// Guards are written `!(x > y)` so NaN inputs fail validation too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod emit;
pub mod ingest;
pub mod run;

/// CLI-level error: library failures keep their class for exit-code
/// mapping; output I/O failures are separate.
#[derive(Debug)]
pub enum CliError {
    Lib(rainbound::Error),
    Io(String),
}

impl From<rainbound::Error> for CliError {
    fn from(e: rainbound::Error) -> Self {
        CliError::Lib(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    /// Process exit code: 2 for configuration problems, 3 for
    /// numeric/convergence failures, 1 for output I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(rainbound::Error::Config(_)) => 2,
            CliError::Lib(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
