use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::records::{
    AtomicDescription, CommentType, FormattedComment, QAPair, RawComment, SplitManifest,
};
use super::CorpusError;

/// Width of the zero-padded line index in synthesized comment ids.
const SYNTH_ID_WIDTH: usize = 6;

fn io_err(path: &Path, source: std::io::Error) -> CorpusError {
    CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn record_err(path: &Path, line: usize, reason: impl Into<String>) -> CorpusError {
    CorpusError::Record {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

fn check_timestamp(path: &Path, line: usize, t: f64) -> Result<(), CorpusError> {
    if !t.is_finite() || t < 0.0 {
        return Err(record_err(path, line, format!("invalid timestamp {t}")));
    }
    Ok(())
}

/// Parse each non-empty line of a newline-delimited JSON file, reporting the
/// 1-based line number on failure.
fn read_lines<T, F>(path: &Path, mut per_line: F) -> Result<Vec<T>, CorpusError>
where
    F: FnMut(&Path, usize, &str) -> Result<T, CorpusError>,
{
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            return Err(record_err(path, line_no, "empty line"));
        }
        out.push(per_line(path, line_no, &line)?);
    }
    Ok(out)
}

fn parse_json<T: DeserializeOwned>(path: &Path, line_no: usize, line: &str) -> Result<T, CorpusError> {
    serde_json::from_str(line).map_err(|e| record_err(path, line_no, e.to_string()))
}

fn write_lines<T: Serialize>(path: &Path, records: &[T]) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = BufWriter::new(file);
    for record in records {
        let json = serde_json::to_string(record)
            .map_err(|e| io_err(path, std::io::Error::other(e)))?;
        out.write_all(json.as_bytes()).map_err(|e| io_err(path, e))?;
        out.write_all(b"\n").map_err(|e| io_err(path, e))?;
    }
    out.flush().map_err(|e| io_err(path, e))
}

/// On-disk shape of a commentary record; the id may be absent.
#[derive(Deserialize)]
struct RawCommentWire {
    comment_id: Option<String>,
    video_id: String,
    scenario: String,
    t: f64,
    #[serde(rename = "type")]
    type_label: CommentType,
    text: String,
}

/// Load a commentary file, synthesizing missing comment ids from the video id
/// and the 1-based line number so reloads always agree.
pub fn load_commentary(path: impl AsRef<Path>) -> Result<Vec<RawComment>, CorpusError> {
    let path = path.as_ref();
    let mut seen: HashMap<String, usize> = HashMap::new();
    read_lines(path, |path, line_no, line| {
        let wire: RawCommentWire = parse_json(path, line_no, line)?;
        check_timestamp(path, line_no, wire.t)?;
        if wire.text.is_empty() {
            return Err(record_err(path, line_no, "empty text"));
        }
        if wire.video_id.is_empty() {
            return Err(record_err(path, line_no, "empty video_id"));
        }
        let comment_id = wire
            .comment_id
            .unwrap_or_else(|| format!("{}#{:0width$}", wire.video_id, line_no, width = SYNTH_ID_WIDTH));
        if let Some(first) = seen.insert(comment_id.clone(), line_no) {
            return Err(CorpusError::DuplicateId {
                path: path.to_path_buf(),
                line: line_no,
                id: comment_id,
                first,
            });
        }
        Ok(RawComment {
            comment_id,
            video_id: wire.video_id,
            scenario: wire.scenario,
            t: wire.t,
            type_label: wire.type_label,
            text: wire.text,
        })
    })
}

pub fn save_commentary(path: impl AsRef<Path>, records: &[RawComment]) -> Result<(), CorpusError> {
    write_lines(path.as_ref(), records)
}

pub fn load_descriptions(path: impl AsRef<Path>) -> Result<Vec<AtomicDescription>, CorpusError> {
    read_lines(path.as_ref(), |path, line_no, line| {
        let desc: AtomicDescription = parse_json(path, line_no, line)?;
        check_timestamp(path, line_no, desc.t)?;
        Ok(desc)
    })
}

pub fn save_descriptions(
    path: impl AsRef<Path>,
    records: &[AtomicDescription],
) -> Result<(), CorpusError> {
    write_lines(path.as_ref(), records)
}

pub fn load_qa_pairs(path: impl AsRef<Path>) -> Result<Vec<QAPair>, CorpusError> {
    let path = path.as_ref();
    let mut seen: HashMap<String, usize> = HashMap::new();
    read_lines(path, |path, line_no, line| {
        let pair: QAPair = parse_json(path, line_no, line)?;
        check_timestamp(path, line_no, pair.t)?;
        if pair.question.is_empty() || pair.answer.is_empty() {
            return Err(record_err(path, line_no, "empty question or answer"));
        }
        if !pair.question.contains('?') {
            return Err(record_err(path, line_no, "question lacks a question mark"));
        }
        if pair.comment_id.is_empty() {
            return Err(record_err(path, line_no, "empty comment_id"));
        }
        if let Some(first) = seen.insert(pair.pair_id.clone(), line_no) {
            return Err(CorpusError::DuplicateId {
                path: path.to_path_buf(),
                line: line_no,
                id: pair.pair_id.clone(),
                first,
            });
        }
        Ok(pair)
    })
}

pub fn save_qa_pairs(path: impl AsRef<Path>, records: &[QAPair]) -> Result<(), CorpusError> {
    write_lines(path.as_ref(), records)
}

pub fn load_formatted_comments(
    path: impl AsRef<Path>,
) -> Result<Vec<FormattedComment>, CorpusError> {
    let path = path.as_ref();
    let mut seen: HashMap<String, usize> = HashMap::new();
    read_lines(path, |path, line_no, line| {
        let comment: FormattedComment = parse_json(path, line_no, line)?;
        check_timestamp(path, line_no, comment.t)?;
        if comment.text.is_empty() {
            return Err(record_err(path, line_no, "empty text"));
        }
        if comment.video_id.is_empty() {
            return Err(record_err(path, line_no, "empty video_id"));
        }
        if let Some(first) = seen.insert(comment.comment_id.clone(), line_no) {
            return Err(CorpusError::DuplicateId {
                path: path.to_path_buf(),
                line: line_no,
                id: comment.comment_id.clone(),
                first,
            });
        }
        Ok(comment)
    })
}

pub fn save_formatted_comments(
    path: impl AsRef<Path>,
    records: &[FormattedComment],
) -> Result<(), CorpusError> {
    write_lines(path.as_ref(), records)
}

/// Load the split manifest and reject any video assigned to two splits.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<SplitManifest, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let manifest: SplitManifest = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| record_err(path, 1, e.to_string()))?;
    let mut seen = std::collections::HashSet::new();
    for id in manifest
        .train
        .iter()
        .chain(manifest.seen.iter())
        .chain(manifest.val.iter())
    {
        if !seen.insert(id.as_str()) {
            return Err(CorpusError::SplitOverlap { id: id.clone() });
        }
    }
    Ok(manifest)
}

pub fn save_manifest(path: impl AsRef<Path>, manifest: &SplitManifest) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let json = serde_json::to_string_pretty(manifest)
        .map_err(|e| io_err(path, std::io::Error::other(e)))?;
    std::fs::write(path, json + "\n").map_err(|e| io_err(path, e))
}
