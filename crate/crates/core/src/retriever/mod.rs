//! Text encoders, the contrastive training loop, and the remote embedding
//! client.
//!
//! The built-in encoder hashes tokens into a fixed number of buckets and
//! mean-pools learned rows, which keeps the whole train/evaluate cycle free
//! of external services. Anything implementing [`TextEncoder`] can stand in
//! for it during evaluation.

mod checkpoint;
mod embedding;
mod encoder;
mod loss;
mod remote;
mod train;

pub use checkpoint::{load_model, save_model, CHECKPOINT_VERSION};
pub use embedding::{cosine_sim, Embedding};
pub use encoder::{tokenize, EncoderModel, TextEncoder, DEFAULT_BUCKETS, DEFAULT_DIM};
pub use loss::{info_nce_loss, loss_gradients, SparseGradient};
pub use remote::{RemoteEncoder, RemoteEncoderConfig};
pub use train::{train, train_model, TrainConfig, TrainOutcome};

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RetrieverError {
    #[error("embedding dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("batch size mismatch: {queries} queries vs {comments} comments")]
    BatchMismatch { queries: usize, comments: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("cannot normalize a zero vector")]
    ZeroNorm,
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("need at least 2 training pairs, got {0}")]
    TooFewPairs(usize),
    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },
    #[error("checkpoint {path}: unsupported version {version}")]
    CheckpointVersion { path: PathBuf, version: u32 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("embedding backend: {0}")]
    Remote(String),
    #[error("embedding backend returned status {status}: {body}")]
    RemoteStatus { status: u16, body: String },
    #[error("embedding backend returned {got} vectors for {want} inputs")]
    RemoteCount { got: usize, want: usize },
}
