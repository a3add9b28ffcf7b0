use std::path::PathBuf;

use serde_json::json;
use thiserror::Error;
use tropcap_core::CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    /// A request the tool declines to run as stated (exit 2).
    #[error("refused: {0}")]
    Refusal(String),
    /// A checked property did not hold (exit 3).
    #[error("property failure: {0}")]
    Property(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_budget() => 2,
            CliError::Core(e) if e.is_property_failure() => 3,
            CliError::Core(e) if e.is_numeric() => 4,
            CliError::Refusal(_) => 2,
            CliError::Property(_) => 3,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(CoreError::BudgetExceeded { .. }) => "budget_exceeded",
            CliError::Core(CoreError::PropertyFailure(_)) | CliError::Property(_) => "property_failure",
            CliError::Core(CoreError::IllConditioned { .. }) => "numeric_failure",
            CliError::Core(CoreError::OriginCrossing) => "origin_crossing",
            CliError::Core(_) => "invalid_input",
            CliError::Refusal(_) => "refused",
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
        }
    }

    /// Single-line JSON for the error stream.
    pub fn to_json(&self) -> String {
        json!({ "error": { "kind": self.kind(), "message": self.to_string(), "exit_code": self.exit_code() } })
            .to_string()
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
