use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// Position in a configuration file, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {message}", anchor(file, location))]
    Validation {
        file: String,
        location: Option<Location>,
        message: String,
    },
    #[error("scenario {scenario}: {source}")]
    Numerical {
        scenario: &'static str,
        #[source]
        source: crossdamp::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Verification(String),
}

fn anchor(file: &str, location: &Option<Location>) -> String {
    match location {
        Some(loc) => format!("{file}:{loc}"),
        None => file.to_string(),
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io { .. } | CliError::Verification(_) => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
