//! Fixed-size retrieval pools: per video segment, the positives plus
//! negatives drawn by a priority rule (same video, then same scenario, then
//! anything else) until the pool reaches its configured length.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::FormattedComment;
use crate::hash::derive_seed;

/// Default number of entries per pool.
pub const DEFAULT_POOL_SIZE: usize = 50;

#[derive(Debug, Error)]
pub enum PoolError {
    #[error("corpus holds {available} distinct comments but pools need {needed}")]
    CorpusTooSmall { available: usize, needed: usize },
    #[error("segment {segment_id} has {count} positives, more than pool size {limit}")]
    TooManyPositives {
        segment_id: String,
        count: usize,
        limit: usize,
    },
    #[error("duplicate comment id {id:?} in pool corpus")]
    DuplicateComment { id: String },
    #[error("no scenario known for videos: {videos:?}")]
    MissingScenario { videos: Vec<String> },
    #[error("segment {segment_id} positive {comment_id:?} missing from corpus")]
    MissingPositive {
        segment_id: String,
        comment_id: String,
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

/// How an entry earned its place in the pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Positive,
    SameVideo,
    SameScenario,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub comment_id: String,
    pub text: String,
    pub provenance: Provenance,
}

/// One ranked-retrieval task: the entries a query is scored against.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalPool {
    pub segment_id: String,
    /// Seed that drove the negative sampling for this pool.
    pub seed: u64,
    pub entries: Vec<PoolEntry>,
}

/// A group of comments sharing one video timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub segment_id: String,
    pub video_id: String,
    pub t_end: f64,
    /// Closed context interval `[t_end - w, t_end]`.
    pub window: (f64, f64),
    /// Comment ids attached to this segment, ascending.
    pub positive_ids: Vec<String>,
}

/// Canonical segment identifier. The shortest round-trip rendering of the
/// timestamp keeps ids stable across save/load cycles.
pub fn segment_id(video_id: &str, t: f64) -> String {
    format!("{video_id}@{t}")
}

/// Exact-equality key for timestamps, folding -0.0 into 0.0.
fn t_key(t: f64) -> u64 {
    (t + 0.0).to_bits()
}

/// Group comments into segments by exact (video, timestamp) equality,
/// sorted by video id then time. Positives within a segment are sorted by
/// comment id, which makes the grouping independent of listing order.
pub fn group_segments(comments: &[FormattedComment], w: f64) -> Vec<Segment> {
    let mut groups: BTreeMap<(String, u64), Vec<&FormattedComment>> = BTreeMap::new();
    for c in comments {
        groups
            .entry((c.video_id.clone(), t_key(c.t)))
            .or_default()
            .push(c);
    }
    let mut segments: Vec<Segment> = groups
        .into_iter()
        .map(|((video_id, _), members)| {
            let t_end = members[0].t;
            let mut positive_ids: Vec<String> =
                members.iter().map(|c| c.comment_id.clone()).collect();
            positive_ids.sort();
            Segment {
                segment_id: segment_id(&video_id, t_end),
                video_id,
                t_end,
                window: (t_end - w, t_end),
                positive_ids,
            }
        })
        .collect();
    segments.sort_by(|a, b| {
        a.video_id
            .cmp(&b.video_id)
            .then(a.t_end.partial_cmp(&b.t_end).expect("finite timestamps"))
    });
    segments
}

/// The comment universe pools draw from, with a scenario per video.
#[derive(Debug, Clone)]
pub struct PoolCorpus {
    comments: Vec<FormattedComment>,
    scenario_by_video: BTreeMap<String, String>,
}

impl PoolCorpus {
    pub fn new(
        comments: Vec<FormattedComment>,
        scenario_by_video: BTreeMap<String, String>,
    ) -> Result<Self, PoolError> {
        let mut ids = BTreeSet::new();
        let mut missing: Vec<String> = Vec::new();
        for c in &comments {
            if !ids.insert(c.comment_id.as_str()) {
                return Err(PoolError::DuplicateComment {
                    id: c.comment_id.clone(),
                });
            }
            if !scenario_by_video.contains_key(&c.video_id)
                && !missing.contains(&c.video_id)
            {
                missing.push(c.video_id.clone());
            }
        }
        if !missing.is_empty() {
            missing.sort();
            return Err(PoolError::MissingScenario { videos: missing });
        }
        Ok(PoolCorpus {
            comments,
            scenario_by_video,
        })
    }

    pub fn comments(&self) -> &[FormattedComment] {
        &self.comments
    }

    pub fn scenario_of(&self, video_id: &str) -> Option<&str> {
        self.scenario_by_video.get(video_id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.comments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comments.is_empty()
    }
}

/// Draw `take` comments uniformly without replacement: sort candidates by
/// comment id, Fisher-Yates shuffle with the pool's RNG, keep the prefix.
fn draw<'a>(
    candidates: &mut Vec<&'a FormattedComment>,
    take: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Vec<&'a FormattedComment> {
    candidates.sort_by(|a, b| a.comment_id.cmp(&b.comment_id));
    candidates.shuffle(rng);
    candidates.iter().take(take).copied().collect()
}

/// Assemble one segment's pool of exactly `pool_size` distinct comments.
pub fn build_pool(
    segment: &Segment,
    corpus: &PoolCorpus,
    pool_size: usize,
    seed: u64,
) -> Result<RetrievalPool, PoolError> {
    if corpus.len() < pool_size {
        return Err(PoolError::CorpusTooSmall {
            available: corpus.len(),
            needed: pool_size,
        });
    }
    if segment.positive_ids.len() > pool_size {
        return Err(PoolError::TooManyPositives {
            segment_id: segment.segment_id.clone(),
            count: segment.positive_ids.len(),
            limit: pool_size,
        });
    }

    let by_id: BTreeMap<&str, &FormattedComment> = corpus
        .comments
        .iter()
        .map(|c| (c.comment_id.as_str(), c))
        .collect();
    let positive_set: BTreeSet<&str> =
        segment.positive_ids.iter().map(String::as_str).collect();

    let mut entries: Vec<PoolEntry> = Vec::with_capacity(pool_size);
    for id in &segment.positive_ids {
        let c = by_id.get(id.as_str()).ok_or_else(|| PoolError::MissingPositive {
            segment_id: segment.segment_id.clone(),
            comment_id: id.clone(),
        })?;
        entries.push(PoolEntry {
            comment_id: c.comment_id.clone(),
            text: c.text.clone(),
            provenance: Provenance::Positive,
        });
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut pooled: BTreeSet<&str> = positive_set.iter().copied().collect();
    let seg_t = t_key(segment.t_end);
    let seg_scenario = corpus.scenario_of(&segment.video_id);

    let tiers: [(Provenance, Box<dyn Fn(&FormattedComment) -> bool + '_>); 3] = [
        (
            Provenance::SameVideo,
            Box::new(|c: &FormattedComment| {
                c.video_id == segment.video_id && t_key(c.t) != seg_t
            }),
        ),
        (
            Provenance::SameScenario,
            Box::new(|c: &FormattedComment| {
                c.video_id != segment.video_id
                    && corpus.scenario_of(&c.video_id) == seg_scenario
            }),
        ),
        (Provenance::Random, Box::new(|_| true)),
    ];

    for (provenance, eligible) in tiers {
        let remaining = pool_size - entries.len();
        if remaining == 0 {
            break;
        }
        let mut candidates: Vec<&FormattedComment> = corpus
            .comments
            .iter()
            .filter(|c| !pooled.contains(c.comment_id.as_str()) && eligible(c))
            .collect();
        for c in draw(&mut candidates, remaining, &mut rng) {
            pooled.insert(c.comment_id.as_str());
            entries.push(PoolEntry {
                comment_id: c.comment_id.clone(),
                text: c.text.clone(),
                provenance,
            });
        }
    }

    debug_assert_eq!(entries.len(), pool_size);
    Ok(RetrievalPool {
        segment_id: segment.segment_id.clone(),
        seed,
        entries,
    })
}

/// Group the corpus into segments and build every pool. Per-segment seeds
/// derive from the base seed and the segment id, so results do not depend
/// on iteration order.
pub fn build_all_pools(
    corpus: &PoolCorpus,
    window_seconds: f64,
    pool_size: usize,
    seed: u64,
) -> Result<Vec<RetrievalPool>, PoolError> {
    let segments = group_segments(&corpus.comments, window_seconds);
    segments
        .iter()
        .map(|seg| build_pool(seg, corpus, pool_size, derive_seed(seed, &seg.segment_id)))
        .collect()
}

/// On-disk shape of one pool.
#[derive(Serialize, Deserialize)]
struct PoolWire {
    segment_id: String,
    #[serde(rename = "L")]
    pool_size: usize,
    seed: u64,
    entries: Vec<PoolEntry>,
}

pub fn save_pools(path: impl AsRef<Path>, pools: &[RetrievalPool]) -> Result<(), PoolError> {
    let path = path.as_ref();
    let io_err = |e: std::io::Error| PoolError::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    for pool in pools {
        let wire = PoolWire {
            segment_id: pool.segment_id.clone(),
            pool_size: pool.entries.len(),
            seed: pool.seed,
            entries: pool.entries.clone(),
        };
        let json = serde_json::to_string(&wire).map_err(|e| io_err(std::io::Error::other(e)))?;
        out.write_all(json.as_bytes()).map_err(io_err)?;
        out.write_all(b"\n").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

pub fn load_pools(path: impl AsRef<Path>) -> Result<Vec<RetrievalPool>, PoolError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| PoolError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let reader = BufReader::new(file);
    let mut pools = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let record_err = |reason: String| PoolError::Record {
            path: path.to_path_buf(),
            line: line_no,
            reason,
        };
        let line = line.map_err(|e| PoolError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        if line.trim().is_empty() {
            return Err(record_err("empty line".into()));
        }
        let wire: PoolWire = serde_json::from_str(&line).map_err(|e| record_err(e.to_string()))?;
        if wire.entries.len() != wire.pool_size {
            return Err(record_err(format!(
                "pool claims {} entries but holds {}",
                wire.pool_size,
                wire.entries.len()
            )));
        }
        let mut ids = BTreeSet::new();
        for e in &wire.entries {
            if !ids.insert(e.comment_id.as_str()) {
                return Err(record_err(format!("duplicate entry {:?}", e.comment_id)));
            }
        }
        if !wire.entries.iter().any(|e| e.provenance == Provenance::Positive) {
            return Err(record_err("pool has no positive entry".into()));
        }
        pools.push(RetrievalPool {
            segment_id: wire.segment_id,
            seed: wire.seed,
            entries: wire.entries,
        });
    }
    Ok(pools)
}
