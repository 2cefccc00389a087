//! Submissions: one generated question per segment, scored against the
//! frozen pools.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::{rank_pool, summarize};
use super::report::{MetricsReport, ReportMetadata, SegmentRank};
use super::EvalError;
use crate::pool::RetrievalPool;
use crate::retriever::TextEncoder;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmissionEntry {
    pub segment_id: String,
    pub question: String,
}

/// Score a submission: exactly one question per pool, no extras. Any
/// missing, duplicated, or unknown segment ids fail with all offenders
/// listed at once.
pub fn evaluate_submission(
    entries: &[SubmissionEntry],
    pools: &[RetrievalPool],
    encoder: &dyn TextEncoder,
    ks: &[u32],
) -> Result<MetricsReport, EvalError> {
    let pool_ids: BTreeSet<&str> = pools.iter().map(|p| p.segment_id.as_str()).collect();
    let mut by_segment: BTreeMap<&str, &str> = BTreeMap::new();
    let mut duplicate = BTreeSet::new();
    let mut unknown = BTreeSet::new();
    for e in entries {
        if by_segment.insert(&e.segment_id, &e.question).is_some() {
            duplicate.insert(e.segment_id.clone());
        }
        if !pool_ids.contains(e.segment_id.as_str()) {
            unknown.insert(e.segment_id.clone());
        }
    }
    let missing: Vec<String> = pools
        .iter()
        .filter(|p| !by_segment.contains_key(p.segment_id.as_str()))
        .map(|p| p.segment_id.clone())
        .collect();
    if !(missing.is_empty() && duplicate.is_empty() && unknown.is_empty()) {
        return Err(EvalError::SubmissionMismatch {
            missing,
            duplicate: duplicate.into_iter().collect(),
            unknown: unknown.into_iter().collect(),
        });
    }
    if pools.is_empty() {
        return Err(EvalError::EmptyRanks);
    }

    let mut ranks = Vec::with_capacity(pools.len());
    let mut per_segment = Vec::with_capacity(pools.len());
    for pool in pools {
        let question = by_segment[pool.segment_id.as_str()];
        let ranked = rank_pool(question, pool, encoder)?;
        ranks.push(ranked.best_positive_rank);
        per_segment.push(SegmentRank {
            segment_id: pool.segment_id.clone(),
            rep: 0,
            best_positive_rank: ranked.best_positive_rank,
        });
    }

    Ok(MetricsReport {
        metrics: summarize(&ranks, ks)?,
        per_segment,
        metadata: ReportMetadata {
            encoder: encoder.id(),
            seed: None,
            reps: 1,
        },
    })
}

pub fn save_submission(
    path: impl AsRef<Path>,
    entries: &[SubmissionEntry],
) -> Result<(), EvalError> {
    let path = path.as_ref();
    let io_err = |e: std::io::Error| EvalError::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    for e in entries {
        let json = serde_json::to_string(e).map_err(|e| io_err(std::io::Error::other(e)))?;
        out.write_all(json.as_bytes()).map_err(io_err)?;
        out.write_all(b"\n").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

pub fn load_submission(path: impl AsRef<Path>) -> Result<Vec<SubmissionEntry>, EvalError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| EvalError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut entries = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let record_err = |reason: String| EvalError::Record {
            path: path.to_path_buf(),
            line: line_no,
            reason,
        };
        let line = line.map_err(|e| EvalError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        if line.trim().is_empty() {
            return Err(record_err("empty line".into()));
        }
        let entry: SubmissionEntry =
            serde_json::from_str(&line).map_err(|e| record_err(e.to_string()))?;
        if entry.question.trim().is_empty() {
            return Err(record_err("empty question".into()));
        }
        if entry.segment_id.trim().is_empty() {
            return Err(record_err("empty segment_id".into()));
        }
        entries.push(entry);
    }
    Ok(entries)
}
