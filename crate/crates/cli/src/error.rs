use serde::Serialize;
use thiserror::Error;

use crate::SCHEMA_VERSION;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(ltk_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<ltk_core::Error> for CliError {
    fn from(e: ltk_core::Error) -> Self {
        match e {
            ltk_core::Error::InvalidParameter(msg) => CliError::Config(msg),
            other => CliError::Numerical(other),
        }
    }
}

impl From<toml::de::Error> for CliError {
    fn from(e: toml::de::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
        }
    }

    /// Machine-readable form printed by the binary on failure.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            schema_version: u32,
            error: &'a str,
            message: String,
            exit_code: i32,
        }
        serde_json::to_string(&Body {
            schema_version: SCHEMA_VERSION,
            error: self.kind(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        })
        .expect("error body serializes")
    }
}

pub type CliResult<T> = Result<T, CliError>;
