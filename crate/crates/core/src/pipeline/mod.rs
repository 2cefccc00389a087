//! Chat-model pipeline that turns raw commentary into question-answer
//! pairs: format comment groups, drop shallow ones, generate a question per
//! surviving comment, then verify and regenerate once where needed.

mod backend;
mod dataset;
mod stages;
mod template;


use std::path::PathBuf;

use thiserror::Error;

pub use backend::{
    load_transcript, request_hash, save_transcript, ChatClient, ChatRequest, LiveBackendConfig,
    LiveChatClient, RecordingClient, ReplayChatClient, TranscriptEntry,
};
pub use dataset::{
    build_qa_dataset, group_comments, load_records, save_records, DatasetOutcome, PipelineConfig,
    ProvenanceRecord, ProvenanceStatus,
};
pub use stages::{
    filter_shallow, format_comments, generate_question, lint_question, regenerate_question,
    verify_question, FilterOutcome, Verdict, DEFAULT_MIN_WORDS,
};
pub use template::{
    comment_formatting_template, goal_template, question_generation_template,
    question_regeneration_template, question_verification_template, shallow_check_template,
    PromptTemplate,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("template {template_id} has no binding for placeholder {placeholder:?}")]
    UnboundPlaceholder {
        template_id: String,
        placeholder: String,
    },
    #[error("chat request failed after {attempts} attempts: {reason}")]
    Backend { attempts: u32, reason: String },
    #[error("chat endpoint returned status {status}: {body}")]
    BackendStatus { status: u16, body: String },
    #[error("chat response carries no message content")]
    EmptyResponse,
    #[error("no transcript entry for request {request_hash}")]
    MissingTranscript { request_hash: String },
    #[error("comment group must be non-empty comments of one video and one label")]
    InvalidGroup,
    #[error("formatter output has no labeled lines: {raw:?}")]
    Unparseable { raw: String },
    #[error("no [question] line for comment {comment_id} after retry: {raw:?}")]
    QuestionFormat { comment_id: String, raw: String },
    #[error("regeneration requires a non-empty reason")]
    EmptyReason,
    #[error("invalid pipeline config: {0}")]
    InvalidConfig(String),
    #[error(
        "{failures} of {attempts} comment groups or questions failed, \
         over the {threshold} failure threshold"
    )]
    TooManyFailures {
        failures: usize,
        attempts: usize,
        threshold: f64,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Record {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}
