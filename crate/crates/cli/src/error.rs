use serde::Serialize;
use thiserror::Error;

/// One problem attached to a config field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldIssue {
    pub field: String,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },

    #[error("parse error at {field}: {message}")]
    Parse { field: String, message: String },

    #[error("invalid configuration ({} issue(s))", .0.len())]
    Invalid(Vec<FieldIssue>),

    #[error(transparent)]
    Core(#[from] mpctrack_core::Error),

    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Read { .. } => "read",
            CliError::Parse { .. } => "parse",
            CliError::Invalid(_) => "invalid_config",
            CliError::Core(_) => "runtime",
            CliError::Output(_) => "output",
        }
    }

    /// Machine-readable description.
    pub fn to_json(&self) -> serde_json::Value {
        let details: Vec<FieldIssue> = match self {
            CliError::Invalid(v) => v.clone(),
            CliError::Parse { field, message } => vec![FieldIssue {
                field: field.clone(),
                message: message.clone(),
            }],
            _ => vec![],
        };
        serde_json::json!({
            "error": self.kind(),
            "message": self.to_string(),
            "details": details,
        })
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
