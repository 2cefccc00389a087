//! Error classes mapped to process exit codes: validation problems exit 1,
//! backend and transport failures exit 2, broken internal invariants exit 3.

use std::fmt;

use elicit_core::corpus::CorpusError;
use elicit_core::eval::EvalError;
use elicit_core::pipeline::PipelineError;
use elicit_core::pool::PoolError;
use elicit_core::retriever::RetrieverError;

#[derive(Debug)]
pub enum CliError {
    /// Bad input: config, flags, files, or data that fails checks.
    Validation(String),
    /// A chat or embeddings backend failed, including replay misses.
    Backend(String),
    /// The tool itself broke an invariant; a bug, not a user problem.
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Backend(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "{msg}"),
            CliError::Backend(msg) => write!(f, "backend: {msg}"),
            CliError::Internal(msg) => write!(f, "internal: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<PoolError> for CliError {
    fn from(e: PoolError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<RetrieverError> for CliError {
    fn from(e: RetrieverError) -> Self {
        match e {
            RetrieverError::Remote(_)
            | RetrieverError::RemoteStatus { .. }
            | RetrieverError::RemoteCount { .. } => CliError::Backend(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Backend { .. }
            | PipelineError::BackendStatus { .. }
            | PipelineError::EmptyResponse
            | PipelineError::MissingTranscript { .. }
            | PipelineError::Unparseable { .. }
            | PipelineError::QuestionFormat { .. } => CliError::Backend(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Retriever(inner) => CliError::from(inner),
            other => CliError::Validation(other.to_string()),
        }
    }
}
