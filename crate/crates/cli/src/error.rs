use std::fmt;

use famova_core::Error as CoreError;
use serde::Serialize;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

/// A failure reported to the user as one JSON line on stderr.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub error: String,
    pub field: String,
    pub message: String,
    #[serde(skip)]
    pub exit_code: u8,
}

impl CliError {
    pub fn validation(field: &str, message: impl Into<String>) -> Self {
        Self {
            error: "validation".into(),
            field: field.into(),
            message: message.into(),
            exit_code: EXIT_VALIDATION,
        }
    }

    pub fn parse(field: &str, message: impl Into<String>) -> Self {
        Self {
            error: "parse".into(),
            ..Self::validation(field, message)
        }
    }

    pub fn io(field: &str, message: impl Into<String>) -> Self {
        Self {
            error: "io".into(),
            ..Self::validation(field, message)
        }
    }

    pub fn from_core(field: &str, err: CoreError) -> Self {
        let field = match &err {
            CoreError::Domain { field, .. } => field,
            _ => field,
        };
        Self {
            error: err.kind().into(),
            field: field.into(),
            message: err.to_string(),
            exit_code: if err.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_VALIDATION
            },
        }
    }

    /// The single machine-parseable line written to stderr.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("error serializes")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}): {}", self.error, self.field, self.message)
    }
}

impl std::error::Error for CliError {}

pub trait CoreResultExt<T> {
    fn field(self, field: &str) -> Result<T, CliError>;
}

impl<T> CoreResultExt<T> for Result<T, CoreError> {
    fn field(self, field: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::from_core(field, e))
    }
}

/// Converts a command-line parsing failure into the common error line,
/// naming the offending flag when clap reports one.
pub fn usage_error(err: &clap::Error) -> CliError {
    use clap::error::{ContextKind, ContextValue};
    let field = match err.get(ContextKind::InvalidArg) {
        Some(ContextValue::String(s)) => s.clone(),
        Some(ContextValue::Strings(v)) => v.join(","),
        _ => "arguments".to_string(),
    };
    let field = field
        .split_whitespace()
        .next()
        .unwrap_or("arguments")
        .trim_start_matches('-')
        .trim_start_matches('<')
        .trim_end_matches('>')
        .to_ascii_lowercase();
    let message = err.to_string();
    let message = message.lines().next().unwrap_or("").trim_start_matches("error: ");
    CliError {
        error: "usage".into(),
        ..CliError::validation(&field, message)
    }
}
