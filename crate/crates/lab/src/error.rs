use std::path::PathBuf;

use dgsm_core::Error as CoreError;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    /// A bench comparison failed, or an output file could not be written.
    Failure = 1,
    /// Bad command line or configuration.
    Usage = 2,
    /// The model could not be evaluated.
    Evaluation = 3,
    /// A request beyond what is supported (table sizes, measures).
    Capacity = 4,
}

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid configuration {}: {source}", path.display())]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Config(String),
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl LabError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            LabError::Usage(_) | LabError::Read { .. } | LabError::Parse { .. } | LabError::Config(_) => {
                ExitCode::Usage
            }
            LabError::Write { .. } => ExitCode::Failure,
            LabError::Core(e) => match e {
                CoreError::Evaluation(_) | CoreError::DegenerateModel => ExitCode::Evaluation,
                CoreError::Capacity(_) | CoreError::UnsupportedMeasure(_) => ExitCode::Capacity,
                _ => ExitCode::Usage,
            },
        }
    }

    /// Short machine-readable category for the status line.
    pub fn kind(&self) -> &'static str {
        match self {
            LabError::Usage(_) => "usage",
            LabError::Read { .. } | LabError::Parse { .. } | LabError::Config(_) => "config",
            LabError::Write { .. } => "output",
            LabError::Core(e) => match e {
                CoreError::Evaluation(_) => "evaluation",
                CoreError::DegenerateModel => "degenerate-model",
                CoreError::Capacity(_) => "capacity",
                CoreError::UnsupportedMeasure(_) => "unsupported-measure",
                CoreError::Capability(_) => "capability",
                _ => "invalid-input",
            },
        }
    }
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
