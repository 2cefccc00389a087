//! Ranking and metrics: score a question against a pool, aggregate recall
//! and rank statistics, and produce the gold / random reference runs that
//! bracket a submission.

mod baselines;
mod metrics;
mod report;
mod submission;

#[cfg(test)]
mod tests;

use std::path::PathBuf;

use thiserror::Error;

use crate::retriever::RetrieverError;

pub use baselines::{expected_random_recall, gold_baseline, random_baseline};
pub use metrics::{
    rank_pool, rank_stats, recall_at_k, single_positive_check, summarize, RankedResult,
};
pub use report::{
    average_summaries, load_report, render_table, save_report, MetricsReport, MetricsSummary,
    ReportMetadata, SegmentRank, TableColumn,
};
pub use submission::{evaluate_submission, load_submission, save_submission, SubmissionEntry};

/// Recall cutoffs reported for benchmark runs.
pub const DEFAULT_RECALL_KS: &[u32] = &[1, 5];
/// Recall cutoffs reported by the encoder sanity check.
pub const CHECK_RECALL_KS: &[u32] = &[1, 5, 10];

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no ranks to aggregate")]
    EmptyRanks,
    #[error("recall cutoff k must be at least 1")]
    InvalidK,
    #[error("reps must be at least 1")]
    InvalidReps,
    #[error("pool {segment_id} has no positive entry")]
    NoPositive { segment_id: String },
    #[error("no candidate question for segment {segment_id}")]
    SegmentWithoutQuestion { segment_id: String },
    #[error(
        "submission does not match pools: missing {missing:?}, duplicated {duplicate:?}, \
         unknown {unknown:?}"
    )]
    SubmissionMismatch {
        missing: Vec<String>,
        duplicate: Vec<String>,
        unknown: Vec<String>,
    },
    #[error("duplicate comment id {id:?} across question-answer pairs")]
    DuplicatePair { id: String },
    #[error(transparent)]
    Retriever(#[from] RetrieverError),
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
    #[error("{path}: {reason}")]
    Malformed { path: PathBuf, reason: String },
}
