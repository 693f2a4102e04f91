use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration, input file or environment.
    #[error("configuration error: {0}")]
    Config(String),
    /// A computation failed or missed its bound.
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Config(_) | Self::Io { .. } => ExitCode::from(2),
            Self::Numerical(_) => ExitCode::from(3),
        }
    }

    pub fn numerical(e: impl std::fmt::Display) -> Self {
        Self::Numerical(e.to_string())
    }
}
