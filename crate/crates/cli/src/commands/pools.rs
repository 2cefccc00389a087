//! build-pools: a fixed-size retrieval pool per segment that carries
//! question-answer pairs of the configured split. The negative source is
//! the whole surviving comment corpus, so pools from different splits draw
//! from one shared pot.

use std::collections::{BTreeMap, BTreeSet};

use elicit_core::corpus::load_formatted_comments;
use elicit_core::hash::derive_seed;
use elicit_core::pool::{build_pool, group_segments, save_pools, segment_id, PoolCorpus};

use crate::config::RunConfig;
use crate::error::CliError;

use super::{load_split_pairs, read_json};

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let comments = load_formatted_comments(config.formatted_file())?;
    let scenarios: BTreeMap<String, String> = read_json(&config.scenarios_file())?;
    let pairs = load_split_pairs(config, config.pool.split)?;
    if pairs.is_empty() {
        return Err(CliError::Validation(format!(
            "no question-answer pairs in split {}",
            config.pool.split.name()
        )));
    }

    let segments = group_segments(&comments, config.pipeline.window_seconds);
    let wanted: BTreeSet<String> = pairs
        .iter()
        .map(|p| segment_id(&p.video_id, p.t))
        .collect();
    let known: BTreeSet<&str> = segments.iter().map(|s| s.segment_id.as_str()).collect();
    let orphaned: Vec<&String> = wanted.iter().filter(|id| !known.contains(id.as_str())).collect();
    if !orphaned.is_empty() {
        return Err(CliError::Validation(format!(
            "pairs reference segments missing from the comment corpus: {orphaned:?}; \
             re-run convert so both come from the same run"
        )));
    }

    let corpus = PoolCorpus::new(comments.clone(), scenarios)?;
    let pools = segments
        .iter()
        .filter(|seg| wanted.contains(&seg.segment_id))
        .map(|seg| {
            build_pool(
                seg,
                &corpus,
                config.pool.size,
                derive_seed(config.pool.seed, &seg.segment_id),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;

    save_pools(config.pools_file(), &pools)?;
    println!(
        "built {} pools of {} entries each (split {}, seed {})",
        pools.len(),
        config.pool.size,
        config.pool.split.name(),
        config.pool.seed
    );
    println!("wrote {}", config.pools_file().display());
    Ok(())
}
