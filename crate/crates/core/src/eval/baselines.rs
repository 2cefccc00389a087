//! The two reference runs every submission is bracketed by: gold questions
//! retrieved with the shipped encoder, and a pure chance ranking.

use std::collections::BTreeMap;

use rand::Rng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::metrics::{rank_pool, summarize};
use super::report::{average_summaries, MetricsReport, ReportMetadata, SegmentRank};
use super::EvalError;
use crate::corpus::QAPair;
use crate::hash::derive_seed_indexed;
use crate::pool::{segment_id, Provenance, RetrievalPool};
use crate::retriever::TextEncoder;

/// Upper reference: for each pool draw one of its human-grounded questions
/// and retrieve with the shipped encoder. Questions are matched to pools by
/// the segment id of their (video, timestamp).
pub fn gold_baseline(
    pools: &[RetrievalPool],
    pairs: &[QAPair],
    encoder: &dyn TextEncoder,
    seed: u64,
    reps: u32,
    ks: &[u32],
) -> Result<MetricsReport, EvalError> {
    if reps == 0 {
        return Err(EvalError::InvalidReps);
    }
    if pools.is_empty() {
        return Err(EvalError::EmptyRanks);
    }
    let mut by_segment: BTreeMap<String, Vec<&QAPair>> = BTreeMap::new();
    for pair in pairs {
        by_segment
            .entry(segment_id(&pair.video_id, pair.t))
            .or_default()
            .push(pair);
    }

    let mut rep_summaries = Vec::with_capacity(reps as usize);
    let mut per_segment = Vec::new();
    for rep in 0..reps {
        let mut ranks = Vec::with_capacity(pools.len());
        for pool in pools {
            let questions = by_segment.get(&pool.segment_id).ok_or_else(|| {
                EvalError::SegmentWithoutQuestion {
                    segment_id: pool.segment_id.clone(),
                }
            })?;
            // The draw seed depends only on (seed, rep, segment), never on
            // pool order, so reordering pools cannot change any result.
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed_indexed(
                seed,
                rep as u64,
                &pool.segment_id,
            ));
            let pick = rng.gen_range(0..questions.len());
            let ranked = rank_pool(&questions[pick].question, pool, encoder)?;
            ranks.push(ranked.best_positive_rank);
            per_segment.push(SegmentRank {
                segment_id: pool.segment_id.clone(),
                rep,
                best_positive_rank: ranked.best_positive_rank,
            });
        }
        rep_summaries.push(summarize(&ranks, ks)?);
    }

    Ok(MetricsReport {
        metrics: average_summaries(&rep_summaries)?,
        per_segment,
        metadata: ReportMetadata {
            encoder: encoder.id(),
            seed: Some(seed),
            reps,
        },
    })
}

/// Lower reference: rank each pool by a seeded random permutation and score
/// the best-placed positive.
pub fn random_baseline(
    pools: &[RetrievalPool],
    seed: u64,
    reps: u32,
    ks: &[u32],
) -> Result<MetricsReport, EvalError> {
    if reps == 0 {
        return Err(EvalError::InvalidReps);
    }
    if pools.is_empty() {
        return Err(EvalError::EmptyRanks);
    }
    let mut rep_summaries = Vec::with_capacity(reps as usize);
    let mut per_segment = Vec::new();
    for rep in 0..reps {
        let mut ranks = Vec::with_capacity(pools.len());
        for pool in pools {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed_indexed(
                seed,
                rep as u64,
                &pool.segment_id,
            ));
            let mut order: Vec<usize> = (0..pool.entries.len()).collect();
            order.shuffle(&mut rng);
            let hit = order
                .iter()
                .position(|&i| pool.entries[i].provenance == Provenance::Positive)
                .ok_or_else(|| EvalError::NoPositive {
                    segment_id: pool.segment_id.clone(),
                })?;
            let rank = hit as u32 + 1;
            ranks.push(rank);
            per_segment.push(SegmentRank {
                segment_id: pool.segment_id.clone(),
                rep,
                best_positive_rank: rank,
            });
        }
        rep_summaries.push(summarize(&ranks, ks)?);
    }

    Ok(MetricsReport {
        metrics: average_summaries(&rep_summaries)?,
        per_segment,
        metadata: ReportMetadata {
            encoder: "random".into(),
            seed: Some(seed),
            reps,
        },
    })
}

/// Closed-form expectation of recall@k for a random permutation of a pool
/// with `positives` relevant entries among `pool_size`: the chance that at
/// least one positive lands in the first k slots,
/// 1 - C(pool_size - positives, k) / C(pool_size, k).
pub fn expected_random_recall(pool_size: usize, positives: usize, k: usize) -> f64 {
    assert!(positives >= 1 && positives <= pool_size, "positives out of range");
    assert!(k >= 1, "k out of range");
    let mut miss = 1.0f64;
    for i in 0..k.min(pool_size) {
        let numer = pool_size as f64 - positives as f64 - i as f64;
        if numer <= 0.0 {
            miss = 0.0;
            break;
        }
        miss *= numer / (pool_size as f64 - i as f64);
    }
    1.0 - miss
}
