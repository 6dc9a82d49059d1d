use std::path::Path;
use std::process::ExitCode;

use layoff_sir::Error as CoreError;

/// Process exit statuses.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    /// Bad flags or config. clap uses the same value for parse failures.
    pub const USAGE: u8 = 2;
    pub const IO: u8 = 3;
    pub const FORMAT: u8 = 4;
    /// Optimizer budget exhausted, degenerate data, or an unusable chain start.
    pub const CONVERGENCE: u8 = 5;
    /// Parameters or settings outside their valid domain.
    pub const DOMAIN: u8 = 6;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("format: {0}")]
    Format(String),
    #[error("convergence: {0}")]
    Convergence(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn format_in(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Format(format!("{}: {err}", path.display()))
    }

    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Io { .. } => exit::IO,
            CliError::Format(_) => exit::FORMAT,
            CliError::Convergence(_) => exit::CONVERGENCE,
            CliError::Domain(_) => exit::DOMAIN,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Io(source) => CliError::Io { path: "<stream>".into(), source },
            CoreError::Csv(inner) if inner.is_io_error() => match inner.into_kind() {
                csv::ErrorKind::Io(source) => CliError::Io { path: "<stream>".into(), source },
                _ => unreachable!("is_io_error checked"),
            },
            CoreError::Csv(inner) => CliError::Format(inner.to_string()),
            CoreError::Format(_) | CoreError::EmptyInput(_) => CliError::Format(e.to_string()),
            CoreError::Convergence { evaluations, best_log_likelihood, ref best } => CliError::Convergence(format!(
                "optimizer stopped after {evaluations} evaluations; best log-likelihood {best_log_likelihood} at {best:?}"
            )),
            CoreError::DegenerateFit(_) | CoreError::InvalidStart => CliError::Convergence(e.to_string()),
            CoreError::Domain(_)
            | CoreError::Range { .. }
            | CoreError::HorizonExceeded { .. }
            | CoreError::Precondition(_) => CliError::Domain(e.to_string()),
        }
    }
}
