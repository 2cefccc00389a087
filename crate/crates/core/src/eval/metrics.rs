//! Per-query ranking and the rank-list statistics built from it.

use std::collections::BTreeSet;

use super::report::{MetricsReport, MetricsSummary, ReportMetadata, SegmentRank};
use super::EvalError;
use crate::corpus::QAPair;
use crate::pool::{Provenance, RetrievalPool};
use crate::retriever::{cosine_sim, TextEncoder};

/// Outcome of scoring one question against one pool.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedResult {
    /// (comment_id, cosine score) in rank order, best first.
    pub scores: Vec<(String, f64)>,
    /// 1-based rank of the best-placed positive entry.
    pub best_positive_rank: u32,
}

/// Score a question against every pool entry and rank descending by
/// similarity. Equal scores are ordered by ascending comment id, so ties
/// resolve the same way on every run.
pub fn rank_pool(
    question: &str,
    pool: &RetrievalPool,
    encoder: &dyn TextEncoder,
) -> Result<RankedResult, EvalError> {
    if !pool
        .entries
        .iter()
        .any(|e| e.provenance == Provenance::Positive)
    {
        return Err(EvalError::NoPositive {
            segment_id: pool.segment_id.clone(),
        });
    }
    let mut texts = Vec::with_capacity(pool.entries.len() + 1);
    texts.push(question.to_string());
    texts.extend(pool.entries.iter().map(|e| e.text.clone()));
    let embedded = encoder.embed_batch(&texts)?;
    let query = &embedded[0];

    let mut order: Vec<(usize, f64)> = Vec::with_capacity(pool.entries.len());
    for (idx, emb) in embedded[1..].iter().enumerate() {
        order.push((idx, cosine_sim(query, emb)?));
    }
    order.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("cosine scores are finite")
            .then_with(|| pool.entries[a.0].comment_id.cmp(&pool.entries[b.0].comment_id))
    });

    let mut best = None;
    let scores = order
        .iter()
        .enumerate()
        .map(|(rank0, &(idx, score))| {
            if best.is_none() && pool.entries[idx].provenance == Provenance::Positive {
                best = Some(rank0 as u32 + 1);
            }
            (pool.entries[idx].comment_id.clone(), score)
        })
        .collect();
    Ok(RankedResult {
        scores,
        best_positive_rank: best.expect("pool holds a positive"),
    })
}

/// Fraction of queries whose best positive landed within the top k.
pub fn recall_at_k(ranks: &[u32], k: u32) -> Result<f64, EvalError> {
    if k == 0 {
        return Err(EvalError::InvalidK);
    }
    if ranks.is_empty() {
        return Err(EvalError::EmptyRanks);
    }
    let hits = ranks.iter().filter(|&&r| r <= k).count();
    Ok(hits as f64 / ranks.len() as f64)
}

/// Mean and median of a rank list. The median of an even-length list is
/// the lower middle, so it is always a rank that actually occurred.
pub fn rank_stats(ranks: &[u32]) -> Result<(f64, f64), EvalError> {
    if ranks.is_empty() {
        return Err(EvalError::EmptyRanks);
    }
    let mean = ranks.iter().map(|&r| r as f64).sum::<f64>() / ranks.len() as f64;
    let mut sorted = ranks.to_vec();
    sorted.sort_unstable();
    let median = sorted[(sorted.len() - 1) / 2] as f64;
    Ok((mean, median))
}

/// Bundle a rank list into the summary block of a report.
pub fn summarize(ranks: &[u32], ks: &[u32]) -> Result<MetricsSummary, EvalError> {
    let (mean_rank, median_rank) = rank_stats(ranks)?;
    let mut recall_at = std::collections::BTreeMap::new();
    for &k in ks {
        recall_at.insert(k, recall_at_k(ranks, k)?);
    }
    Ok(MetricsSummary {
        recall_at,
        mean_rank,
        median_rank,
        n_queries: ranks.len() as u64,
    })
}

/// Sanity check for an encoder without pools: rank each pair's own answer
/// among the answers of every pair. Per-row ids in the report are pair ids.
pub fn single_positive_check(
    pairs: &[QAPair],
    encoder: &dyn TextEncoder,
    ks: &[u32],
) -> Result<MetricsReport, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptyRanks);
    }
    let mut seen = BTreeSet::new();
    for p in pairs {
        if !seen.insert(p.comment_id.as_str()) {
            return Err(EvalError::DuplicatePair {
                id: p.comment_id.clone(),
            });
        }
    }

    let questions: Vec<String> = pairs.iter().map(|p| p.question.clone()).collect();
    let answers: Vec<String> = pairs.iter().map(|p| p.answer.clone()).collect();
    let q_emb = encoder.embed_batch(&questions)?;
    let a_emb = encoder.embed_batch(&answers)?;

    let mut ranks = Vec::with_capacity(pairs.len());
    let mut per_segment = Vec::with_capacity(pairs.len());
    for (i, pair) in pairs.iter().enumerate() {
        let own = cosine_sim(&q_emb[i], &a_emb[i])?;
        let mut ahead = 0u32;
        for (j, other) in pairs.iter().enumerate() {
            if j == i {
                continue;
            }
            let s = cosine_sim(&q_emb[i], &a_emb[j])?;
            if s > own || (s == own && other.comment_id < pair.comment_id) {
                ahead += 1;
            }
        }
        let rank = ahead + 1;
        ranks.push(rank);
        per_segment.push(SegmentRank {
            segment_id: pair.pair_id.clone(),
            rep: 0,
            best_positive_rank: rank,
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
