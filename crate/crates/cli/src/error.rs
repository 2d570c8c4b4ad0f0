use drugshap_core::clinical::{ClinicalError, LlmError};
use drugshap_core::config::ConfigError;
use drugshap_core::dataset::DatasetError;
use drugshap_core::evaluation::EvalError;
use drugshap_core::explain::ExplainError;
use drugshap_core::gbdt::GbdtError;
use drugshap_core::persist::PersistError;
use serde::Serialize;
use thiserror::Error;

/// Failure of a CLI command, reported on stderr as `{code, message}`.
#[derive(Debug, Error)]
#[error("{code}: {message}")]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    code: &'a str,
    message: &'a str,
}

impl CliError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ErrorBody { code: self.code, message: &self.message }).expect("error serializes")
    }

    /// Process exit status: 2 for bad input or configuration, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self.code {
            "usage" | "config" | "invalid_argument" => 2,
            _ => 1,
        }
    }
}

macro_rules! from_error {
    ($t:ty, $code:literal) => {
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::new($code, e.to_string())
            }
        }
    };
}

from_error!(ConfigError, "config");
from_error!(DatasetError, "dataset");
from_error!(EvalError, "evaluation");
from_error!(GbdtError, "model");
from_error!(ExplainError, "explain");
from_error!(ClinicalError, "clinical");
from_error!(LlmError, "llm");
from_error!(PersistError, "artifact");
from_error!(std::io::Error, "io");
from_error!(serde_json::Error, "json");
