use std::path::PathBuf;

use flowgrowth_core::Error as CoreError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("{0}")]
    Usage(String),

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Core(CoreError),
}

impl CliError {
    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => EXIT_VALIDATION,
            CliError::Usage(_) => EXIT_USAGE,
            CliError::VerificationFailed(_) => EXIT_VERIFICATION,
            CliError::Io { .. } => EXIT_RUNTIME,
            CliError::Core(_) => EXIT_RUNTIME,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Invalid { field, reason } => CliError::Validation {
                field: field.into(),
                reason,
            },
            CoreError::RateBelowKhat { r, k_hat } => {
                CliError::validation("r", format!("rate {r} lies below k_hat = {k_hat}"))
            }
            CoreError::StepTooCoarse { dt, value } => CliError::validation(
                "dt",
                format!("step {dt} too coarse: dt*(d-1)*beta_N = {value} exceeds 0.1"),
            ),
            CoreError::TaylorViolation { which, r } => CliError::validation(
                "model",
                format!("Taylor domination violated by {which} at r = {r}"),
            ),
            other => CliError::Core(other),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
