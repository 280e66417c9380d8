use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {detail}")]
    Config { line: usize, detail: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Library(#[from] dbar_nft::Error),
    #[error("{0}")]
    Io(#[from] io::Error),
}

impl CliError {
    /// Category word of the `error: <category>: <detail>` line.
    pub fn category(&self) -> &'static str {
        use dbar_nft::Error as E;
        match self {
            CliError::Config { .. } | CliError::UnknownKey { .. } => "config",
            CliError::Validation(_) => "validation",
            CliError::Library(E::NotConverged { .. }) => "convergence",
            CliError::Library(E::Io(_)) | CliError::Io(_) => "io",
            CliError::Library(E::Format(_)) => "format",
            CliError::Library(_) => "validation",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.category() {
            "convergence" => 2,
            "io" | "format" => 3,
            _ => 1,
        }
    }
}
