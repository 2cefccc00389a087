//! Deterministic synthetic corpora for self-tests and calibration runs.
//!
//! Two generators: a trainable question/answer world where every pair
//! shares a few rare tokens that appear nowhere else, and randomized
//! comment universes for fuzzing pool construction.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{CommentType, FormattedComment, QAPair};
use crate::pool::{PoolCorpus, PoolError};

/// Shape of a generated world. The defaults give 500 pairs whose texts run
/// 54 tokens: 48 noise words from a 200-word shared vocabulary plus two
/// pair-unique rare tokens repeated three times each.
#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub scenarios: usize,
    pub videos_per_scenario: usize,
    pub pairs_per_video: usize,
    pub noise_vocab: usize,
    pub noise_words_per_text: usize,
    pub rare_tokens_per_pair: usize,
    /// How many times each rare token repeats inside a text.
    pub rare_repeats: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 7,
            scenarios: 5,
            videos_per_scenario: 10,
            pairs_per_video: 10,
            noise_vocab: 200,
            noise_words_per_text: 48,
            rare_tokens_per_pair: 2,
            rare_repeats: 3,
        }
    }
}

/// A generated corpus: one comment per (video, timestamp), one question
/// per comment.
#[derive(Debug, Clone)]
pub struct SyntheticWorld {
    pub comments: Vec<FormattedComment>,
    pub pairs: Vec<QAPair>,
    pub scenario_by_video: BTreeMap<String, String>,
}

impl SyntheticWorld {
    /// (question, answer) pairs in corpus order, ready for the trainer.
    pub fn training_pairs(&self) -> Vec<(String, String)> {
        self.pairs
            .iter()
            .map(|p| (p.question.clone(), p.answer.clone()))
            .collect()
    }

    pub fn pool_corpus(&self) -> Result<PoolCorpus, PoolError> {
        PoolCorpus::new(self.comments.clone(), self.scenario_by_video.clone())
    }
}

fn sample_text(
    rng: &mut ChaCha8Rng,
    config: &SyntheticConfig,
    rare: &[String],
) -> String {
    let mut words: Vec<String> = (0..config.noise_words_per_text)
        .map(|_| format!("noise{:03}", rng.gen_range(0..config.noise_vocab)))
        .collect();
    for token in rare {
        for _ in 0..config.rare_repeats {
            words.push(token.clone());
        }
    }
    words.shuffle(rng);
    words.join(" ")
}

/// Build the world. Timestamps step by ten seconds inside each video, so
/// every comment is its own segment and same-video negatives always exist.
pub fn generate_world(config: &SyntheticConfig) -> SyntheticWorld {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut world = SyntheticWorld {
        comments: Vec::new(),
        pairs: Vec::new(),
        scenario_by_video: BTreeMap::new(),
    };
    let mut index = 0usize;
    for s in 0..config.scenarios {
        let scenario = format!("scenario{s:02}");
        for v in 0..config.videos_per_scenario {
            let video_id = format!("s{s:02}v{v:02}");
            world
                .scenario_by_video
                .insert(video_id.clone(), scenario.clone());
            for k in 0..config.pairs_per_video {
                let comment_id = format!("c{index:04}");
                let t = ((k + 1) * 10) as f64;
                let rare: Vec<String> = (0..config.rare_tokens_per_pair)
                    .map(|r| format!("rare{index:04}{}", (b'x' + r as u8) as char))
                    .collect();
                let type_label = if index % 2 == 0 {
                    CommentType::GoodExecution
                } else {
                    CommentType::TipsForImprovement
                };
                let answer = sample_text(&mut rng, config, &rare);
                // The question mark is required of every stored pair; it is
                // punctuation, so the tokenized text is unchanged by it.
                let question = sample_text(&mut rng, config, &rare) + "?";
                world.comments.push(FormattedComment {
                    comment_id: comment_id.clone(),
                    video_id: video_id.clone(),
                    t,
                    type_label,
                    text: answer.clone(),
                    source_ids: vec![comment_id.clone()],
                });
                world.pairs.push(QAPair {
                    pair_id: format!("{comment_id}/q"),
                    video_id: video_id.clone(),
                    t,
                    type_label,
                    question,
                    answer,
                    comment_id,
                });
                index += 1;
            }
        }
    }
    world
}

/// Randomized comment universe for pool fuzzing. Timestamps collide on
/// purpose so segments carry several positives, and the returned pool size
/// always lies between the largest positive group and the corpus size, so
/// construction must succeed and every tier boundary gets exercised.
pub fn random_pool_corpus(seed: u64) -> (PoolCorpus, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut comments = Vec::new();
    let mut scenario_by_video = BTreeMap::new();
    let n_scenarios = rng.gen_range(1..=3);
    let mut index = 0usize;
    for s in 0..n_scenarios {
        let scenario = format!("fuzz-scenario{s}");
        for v in 0..rng.gen_range(1..=4usize) {
            let video_id = format!("f{s}v{v}");
            scenario_by_video.insert(video_id.clone(), scenario.clone());
            for _ in 0..rng.gen_range(1..=25usize) {
                comments.push(FormattedComment {
                    comment_id: format!("z{index:04}"),
                    video_id: video_id.clone(),
                    t: rng.gen_range(0..8) as f64 * 5.0,
                    type_label: if rng.gen_bool(0.5) {
                        CommentType::GoodExecution
                    } else {
                        CommentType::TipsForImprovement
                    },
                    text: format!("fuzz comment {index}"),
                    source_ids: vec![format!("z{index:04}")],
                });
                index += 1;
            }
        }
    }

    let mut by_segment: BTreeMap<(&str, u64), usize> = BTreeMap::new();
    for c in &comments {
        *by_segment
            .entry((c.video_id.as_str(), c.t.to_bits()))
            .or_default() += 1;
    }
    let max_positives = by_segment.values().copied().max().unwrap_or(1);
    let hi = comments.len().min(60).max(max_positives);
    let pool_size = rng.gen_range(max_positives..=hi);
    let corpus = PoolCorpus::new(comments, scenario_by_video)
        .expect("generated ids are unique and every video has a scenario");
    (corpus, pool_size)
}
