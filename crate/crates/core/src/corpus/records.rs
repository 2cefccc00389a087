use serde::{Deserialize, Serialize};

/// The two commentary categories carried through the whole pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CommentType {
    GoodExecution,
    TipsForImprovement,
}

impl CommentType {
    /// Human-readable form used when rendering prompts.
    pub fn human_label(self) -> &'static str {
        match self {
            CommentType::GoodExecution => "Good Execution",
            CommentType::TipsForImprovement => "Tips for Improvement",
        }
    }
}

/// One transcribed commentary utterance tied to a video timestamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawComment {
    pub comment_id: String,
    pub video_id: String,
    pub scenario: String,
    /// Seconds from the start of the video.
    pub t: f64,
    #[serde(rename = "type")]
    pub type_label: CommentType,
    pub text: String,
}

/// One narration line describing what is visible around a timestamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicDescription {
    pub video_id: String,
    pub t: f64,
    pub text: String,
}

/// Commentary rewritten into a self-contained statement, possibly merging
/// several raw utterances made at close timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormattedComment {
    pub comment_id: String,
    pub video_id: String,
    /// Earliest timestamp among the merged sources.
    pub t: f64,
    #[serde(rename = "type")]
    pub type_label: CommentType,
    pub text: String,
    pub source_ids: Vec<String>,
}

/// A generated question paired with the formatted comment it elicits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QAPair {
    pub pair_id: String,
    pub video_id: String,
    pub t: f64,
    #[serde(rename = "type")]
    pub type_label: CommentType,
    pub question: String,
    pub answer: String,
    pub comment_id: String,
}

/// Assignment of video ids to the train/seen/val splits.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub train: Vec<String>,
    pub seen: Vec<String>,
    pub val: Vec<String>,
}
