//! Record types and file handling for the commentary corpus.
//!
//! Every on-disk format is newline-delimited JSON except the split manifest,
//! which is a single JSON object. Text is stored exactly as received; any
//! normalization happens downstream in the encoder tokenizer.

mod io;
mod records;
mod split;
mod window;

pub use io::{
    load_commentary, load_descriptions, load_formatted_comments, load_manifest, load_qa_pairs,
    save_commentary, save_descriptions, save_formatted_comments, save_manifest, save_qa_pairs,
};
pub use records::{
    AtomicDescription, CommentType, FormattedComment, QAPair, RawComment, SplitManifest,
};
pub use split::{split_dataset, SplitPairs};
pub use window::{window_descriptions, DEFAULT_WINDOW_SECONDS};

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
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
    #[error("{path}:{line}: duplicate id {id:?} (first seen at line {first})")]
    DuplicateId {
        path: PathBuf,
        line: usize,
        id: String,
        first: usize,
    },
    #[error("split manifest assigns video {id:?} to more than one split")]
    SplitOverlap { id: String },
    #[error("videos not assigned to any split: {ids:?}")]
    UnassignedVideos { ids: Vec<String> },
}
