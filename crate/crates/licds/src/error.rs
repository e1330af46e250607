use std::fmt;

use licds_core::codec::CodecError;
use licds_core::learn::{DatasetError, GpError, TrainError};
use licds_core::{FitError, IntegrateError, LicdsError, SelectionError, UnknownSystem};
use serde::Serialize;

/// Failure of a command, grouped by exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flags, parameters or inputs. Exit code 2.
    Config(String),
    /// A numeric computation diverged or failed. Exit code 3.
    Numeric(String),
    /// Reading or writing a file failed. Exit code 4.
    Io(String),
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: &'a str,
    code: i32,
    message: &'a str,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numeric(_) => "numeric",
            CliError::Io(_) => "io",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numeric(m) | CliError::Io(m) => m,
        }
    }

    /// One-line JSON for stderr.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ErrorLine {
            error: self.kind(),
            code: self.exit_code(),
            message: self.message(),
        })
        .expect("string fields serialize")
    }

    pub fn context(self, what: &str) -> Self {
        match self {
            CliError::Config(m) => CliError::Config(format!("{what}: {m}")),
            CliError::Numeric(m) => CliError::Numeric(format!("{what}: {m}")),
            CliError::Io(m) => CliError::Io(format!("{what}: {m}")),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.kind(), self.message())
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<UnknownSystem> for CliError {
    fn from(e: UnknownSystem) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<IntegrateError> for CliError {
    fn from(e: IntegrateError) -> Self {
        match e {
            IntegrateError::BlowUp { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        match e {
            FitError::NonFinite { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<LicdsError> for CliError {
    fn from(e: LicdsError) -> Self {
        match e {
            LicdsError::InvalidParams(_) | LicdsError::TruthMismatch(_) => {
                CliError::Config(e.to_string())
            }
            LicdsError::Fit(f) => f.into(),
            LicdsError::Integrate(i) => i.into(),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<SelectionError> for CliError {
    fn from(e: SelectionError) -> Self {
        match e {
            SelectionError::NoInitialPoints | SelectionError::TooFewCandidates(_) => {
                CliError::Config(e.to_string())
            }
            SelectionError::AllPointsFailed(inner) => CliError::from(inner).context("all initial points failed"),
            SelectionError::Candidate { name, source } => CliError::from(source).context(&format!("candidate `{name}`")),
        }
    }
}

impl From<CodecError> for CliError {
    fn from(e: CodecError) -> Self {
        match e {
            CodecError::Rollout(_) => CliError::Numeric(e.to_string()),
            CodecError::InvalidSpec(_) | CodecError::DimensionMismatch { .. } | CodecError::HeaderOverflow(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Io(format!("malformed message: {e}")),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::AllDropped(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::NonFiniteLoss { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<GpError> for CliError {
    fn from(e: GpError) -> Self {
        match e {
            GpError::NotPositiveDefinite { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}
