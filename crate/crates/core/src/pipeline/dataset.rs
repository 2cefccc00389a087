//! End-to-end dataset construction: group raw comments, run the four
//! stages over a chat backend, and emit question-answer pairs plus a
//! provenance record for every comment that entered the pipeline.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::backend::ChatClient;
use super::stages::{
    filter_shallow, format_comments, generate_question, lint_question, regenerate_question,
    verify_question, DEFAULT_MIN_WORDS,
};
use super::PipelineError;
use crate::corpus::{window_descriptions, AtomicDescription, FormattedComment, QAPair, RawComment};
use crate::corpus::DEFAULT_WINDOW_SECONDS;

/// Knobs for one dataset construction run.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Description window in seconds, looking back from each comment.
    pub window_seconds: f64,
    /// Raw comments of one video and label merge into a group when their
    /// timestamps all lie within this many seconds of the group's first.
    pub grouping_delta: f64,
    /// Formatted comments under this word count are dropped.
    pub min_words: usize,
    /// Run fails when failed groups and questions exceed this fraction of
    /// attempts.
    pub failure_threshold: f64,
    pub gen_temperature: f64,
    pub verify_temperature: f64,
    pub checker_temperature: f64,
    /// Upper bound on concurrent chat requests.
    pub max_in_flight: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            window_seconds: DEFAULT_WINDOW_SECONDS,
            grouping_delta: 1.0,
            min_words: DEFAULT_MIN_WORDS,
            failure_threshold: 0.05,
            gen_temperature: 0.7,
            verify_temperature: 0.0,
            checker_temperature: 0.0,
            max_in_flight: 4,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(self.window_seconds.is_finite() && self.window_seconds >= 0.0) {
            return Err(PipelineError::InvalidConfig(
                "window_seconds must be finite and non-negative".into(),
            ));
        }
        if !(self.grouping_delta.is_finite() && self.grouping_delta >= 0.0) {
            return Err(PipelineError::InvalidConfig(
                "grouping_delta must be finite and non-negative".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.failure_threshold) {
            return Err(PipelineError::InvalidConfig(
                "failure_threshold must lie in [0, 1]".into(),
            ));
        }
        for (name, t) in [
            ("gen_temperature", self.gen_temperature),
            ("verify_temperature", self.verify_temperature),
            ("checker_temperature", self.checker_temperature),
        ] {
            if !(t.is_finite() && t >= 0.0) {
                return Err(PipelineError::InvalidConfig(format!(
                    "{name} must be finite and non-negative"
                )));
            }
        }
        if self.max_in_flight == 0 {
            return Err(PipelineError::InvalidConfig(
                "max_in_flight must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// What happened to one comment (or one group) on its way through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProvenanceStatus {
    /// Question emitted from the first generation pass.
    Emitted,
    /// Question emitted after one regeneration; passes lint.
    EmittedRegenerated,
    /// Regenerated question kept despite failing lint (single-pass rule).
    EmittedRegeneratedLintFlagged,
    /// Dropped by the word-count rule.
    SkippedShort,
    /// Dropped by the checker backend.
    SkippedShallow,
    /// Regenerated question lacked a question mark, which no emitted pair
    /// may have; the comment is skipped.
    SkippedRegeneratedNoQuestionMark,
    /// The whole group produced no formatted comments.
    SkippedEmptyFormat,
    /// Formatting failed (backend or unparseable output).
    FailedFormat,
    /// Generation, verification, or regeneration failed.
    FailedQuestion,
}

impl ProvenanceStatus {
    fn is_failure(self) -> bool {
        matches!(
            self,
            ProvenanceStatus::FailedFormat | ProvenanceStatus::FailedQuestion
        )
    }
}

/// One line of the skip/provenance log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceRecord {
    /// Formatted comment id, or the group's first raw id for group-level
    /// records.
    pub comment_id: String,
    pub video_id: String,
    pub status: ProvenanceStatus,
    /// Failure message, drop reason, or empty for clean emissions.
    pub detail: String,
}

/// Everything a conversion run produces: the pairs, the full per-comment
/// account, and the surviving comment corpus that later feeds pool
/// construction.
#[derive(Debug, Default)]
pub struct DatasetOutcome {
    pub pairs: Vec<QAPair>,
    pub records: Vec<ProvenanceRecord>,
    /// Formatted comments that passed the shallow filter, whether or not a
    /// question was ultimately emitted for them.
    pub kept: Vec<FormattedComment>,
    /// First scenario seen per video among the input comments.
    pub scenario_by_video: BTreeMap<String, String>,
}

/// Group raw comments by (video, label), then split each stream so every
/// group's timestamps span at most `delta` seconds. Order within a group
/// is by timestamp, then id; groups are ordered by video, label, and time.
pub fn group_comments(raw: &[RawComment], delta: f64) -> Vec<Vec<RawComment>> {
    let mut streams: BTreeMap<(String, crate::corpus::CommentType), Vec<RawComment>> =
        BTreeMap::new();
    for c in raw {
        streams
            .entry((c.video_id.clone(), c.type_label))
            .or_default()
            .push(c.clone());
    }
    let mut groups = Vec::new();
    for (_, mut stream) in streams {
        stream.sort_by(|a, b| {
            a.t.partial_cmp(&b.t)
                .expect("finite timestamps")
                .then_with(|| a.comment_id.cmp(&b.comment_id))
        });
        let mut current: Vec<RawComment> = Vec::new();
        for c in stream {
            if let Some(first) = current.first() {
                if c.t - first.t > delta {
                    groups.push(std::mem::take(&mut current));
                }
            }
            current.push(c);
        }
        if !current.is_empty() {
            groups.push(current);
        }
    }
    groups
}

/// Run `f` over `items` with at most `max_in_flight` concurrent calls,
/// returning results in input order.
pub(crate) fn map_concurrent<T, U, F>(
    items: &[T],
    max_in_flight: usize,
    f: F,
) -> Vec<Result<U, PipelineError>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U, PipelineError> + Sync,
{
    assert!(max_in_flight >= 1, "max_in_flight must be at least 1");
    let n = items.len();
    let workers = max_in_flight.min(n);
    if workers <= 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<U, PipelineError>>>> =
        (0..n).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let result = f(&items[i]);
                *slots[i].lock().expect("result slot poisoned") = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .expect("result slot poisoned")
                .expect("worker filled every claimed slot")
        })
        .collect()
}

/// Full construction: group, format, filter, question, verify, regenerate.
/// Deterministic under a replay backend. Individual failures become
/// records; the run errors only when the failure ratio exceeds the
/// configured threshold.
pub fn build_qa_dataset(
    raw: &[RawComment],
    descriptions: &[AtomicDescription],
    chat: &dyn ChatClient,
    checker: &dyn ChatClient,
    config: &PipelineConfig,
) -> Result<DatasetOutcome, PipelineError> {
    config.validate()?;
    let mut outcome = DatasetOutcome::default();
    let groups = group_comments(raw, config.grouping_delta);

    // Formatting is a faithful rewrite, so it runs at the deterministic
    // verification temperature rather than the creative generation one.
    let formatted_results = map_concurrent(&groups, config.max_in_flight, |group| {
        format_comments(chat, config.verify_temperature, group, &group[0].scenario)
    });

    let mut formatted = Vec::new();
    let mut scenario_of: BTreeMap<String, String> = BTreeMap::new();
    let mut failures = 0usize;
    let mut attempts = 0usize;
    for (group, result) in groups.iter().zip(formatted_results) {
        let head = &group[0];
        scenario_of
            .entry(head.video_id.clone())
            .or_insert_with(|| head.scenario.clone());
        match result {
            Ok(list) if list.is_empty() => {
                outcome.records.push(ProvenanceRecord {
                    comment_id: head.comment_id.clone(),
                    video_id: head.video_id.clone(),
                    status: ProvenanceStatus::SkippedEmptyFormat,
                    detail: "formatter discarded the group".into(),
                });
            }
            Ok(list) => formatted.extend(list),
            Err(e) => {
                attempts += 1;
                failures += 1;
                outcome.records.push(ProvenanceRecord {
                    comment_id: head.comment_id.clone(),
                    video_id: head.video_id.clone(),
                    status: ProvenanceStatus::FailedFormat,
                    detail: e.to_string(),
                });
            }
        }
    }

    let filtered = filter_shallow(
        checker,
        config.checker_temperature,
        &formatted,
        config.min_words,
    );
    for (comment, reason) in &filtered.dropped {
        let status = if reason.starts_with("short") {
            ProvenanceStatus::SkippedShort
        } else {
            ProvenanceStatus::SkippedShallow
        };
        outcome.records.push(ProvenanceRecord {
            comment_id: comment.comment_id.clone(),
            video_id: comment.video_id.clone(),
            status,
            detail: reason.clone(),
        });
    }

    attempts += filtered.kept.len();
    let question_results = map_concurrent(&filtered.kept, config.max_in_flight, |comment| {
        let descs = window_descriptions(
            descriptions,
            &comment.video_id,
            comment.t,
            config.window_seconds,
        );
        let scenario = scenario_of
            .get(&comment.video_id)
            .map(String::as_str)
            .unwrap_or_default();
        let q0 = generate_question(chat, config.gen_temperature, comment, &descs, scenario)?;
        let lint = lint_question(&q0);
        let verdict = if lint.ok {
            verify_question(chat, config.verify_temperature, &q0, comment, &descs)?
        } else {
            lint
        };
        if verdict.ok {
            return Ok((q0, ProvenanceStatus::Emitted, String::new()));
        }
        let q1 = regenerate_question(
            chat,
            config.gen_temperature,
            &q0,
            &verdict.reason,
            comment,
            &descs,
            scenario,
        )?;
        if !q1.contains('?') {
            return Ok((
                q1,
                ProvenanceStatus::SkippedRegeneratedNoQuestionMark,
                verdict.reason,
            ));
        }
        let status = if lint_question(&q1).ok {
            ProvenanceStatus::EmittedRegenerated
        } else {
            ProvenanceStatus::EmittedRegeneratedLintFlagged
        };
        Ok((q1, status, verdict.reason))
    });

    for (comment, result) in filtered.kept.iter().zip(question_results) {
        match result {
            Ok((question, status, detail)) => {
                outcome.records.push(ProvenanceRecord {
                    comment_id: comment.comment_id.clone(),
                    video_id: comment.video_id.clone(),
                    status,
                    detail,
                });
                if status != ProvenanceStatus::SkippedRegeneratedNoQuestionMark {
                    outcome.pairs.push(QAPair {
                        pair_id: format!("{}/q", comment.comment_id),
                        video_id: comment.video_id.clone(),
                        t: comment.t,
                        type_label: comment.type_label,
                        question,
                        answer: comment.text.clone(),
                        comment_id: comment.comment_id.clone(),
                    });
                }
            }
            Err(e) => {
                failures += 1;
                outcome.records.push(ProvenanceRecord {
                    comment_id: comment.comment_id.clone(),
                    video_id: comment.video_id.clone(),
                    status: ProvenanceStatus::FailedQuestion,
                    detail: e.to_string(),
                });
            }
        }
    }

    debug_assert_eq!(
        failures,
        outcome
            .records
            .iter()
            .filter(|r| r.status.is_failure())
            .count()
    );
    if attempts > 0 && failures as f64 / attempts as f64 > config.failure_threshold {
        return Err(PipelineError::TooManyFailures {
            failures,
            attempts,
            threshold: config.failure_threshold,
        });
    }
    outcome.kept = filtered.kept;
    outcome.scenario_by_video = scenario_of;
    Ok(outcome)
}

pub fn save_records(
    path: impl AsRef<Path>,
    records: &[ProvenanceRecord],
) -> Result<(), PipelineError> {
    let path = path.as_ref();
    let io_err = |e: std::io::Error| PipelineError::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    for record in records {
        let json = serde_json::to_string(record).map_err(|e| io_err(std::io::Error::other(e)))?;
        out.write_all(json.as_bytes()).map_err(io_err)?;
        out.write_all(b"\n").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

pub fn load_records(path: impl AsRef<Path>) -> Result<Vec<ProvenanceRecord>, PipelineError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| PipelineError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut records = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| PipelineError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ProvenanceRecord =
            serde_json::from_str(&line).map_err(|e| PipelineError::Record {
                path: path.to_path_buf(),
                line: idx + 1,
                reason: e.to_string(),
            })?;
        records.push(record);
    }
    Ok(records)
}
