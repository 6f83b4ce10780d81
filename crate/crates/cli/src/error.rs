use std::path::Path;

use jumpsync::covport::CovError;
use jumpsync::eventmatrix::EventError;
use jumpsync::jumpdetect::DetectError;
use jumpsync::pipeline::PipelineError;
use jumpsync::rearrange::RearrangeError;
use jumpsync::simgen::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Io { .. } => 1,
            Self::Schema(_) => 2,
            Self::Infeasible(_) => 3,
            Self::Numerical(_) => 4,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        Self::Schema(e.to_string())
    }
}

impl From<EventError> for CliError {
    fn from(e: EventError) -> Self {
        Self::Schema(e.to_string())
    }
}

impl From<DetectError> for CliError {
    fn from(e: DetectError) -> Self {
        Self::Schema(e.to_string())
    }
}

impl From<RearrangeError> for CliError {
    fn from(e: RearrangeError) -> Self {
        match e {
            RearrangeError::Infeasible { .. } => Self::Infeasible(e.to_string()),
            RearrangeError::SearchSpaceTooLarge(_) => Self::Numerical(e.to_string()),
            _ => Self::Schema(e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Detect(e) => e.into(),
            PipelineError::Event(e) => e.into(),
            PipelineError::Rearrange(e) => e.into(),
        }
    }
}

impl From<CovError> for CliError {
    fn from(e: CovError) -> Self {
        match e {
            CovError::Schema(_) | CovError::InvalidArgument(_) => Self::Schema(e.to_string()),
            CovError::Infeasible { .. } => Self::Infeasible(e.to_string()),
            CovError::Numerical(_) | CovError::Degenerate(_) => Self::Numerical(e.to_string()),
        }
    }
}
