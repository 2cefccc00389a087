use std::collections::HashSet;

use super::records::{QAPair, SplitManifest};
use super::CorpusError;

/// Question/answer pairs partitioned by the split manifest.
#[derive(Debug, Clone, Default)]
pub struct SplitPairs {
    pub train: Vec<QAPair>,
    pub seen: Vec<QAPair>,
    pub val: Vec<QAPair>,
}

/// Partition pairs by video membership, preserving input order within each
/// split. Every referenced video must appear in the manifest.
pub fn split_dataset(pairs: &[QAPair], manifest: &SplitManifest) -> Result<SplitPairs, CorpusError> {
    let train: HashSet<&str> = manifest.train.iter().map(String::as_str).collect();
    let seen: HashSet<&str> = manifest.seen.iter().map(String::as_str).collect();
    let val: HashSet<&str> = manifest.val.iter().map(String::as_str).collect();

    let mut out = SplitPairs::default();
    let mut unassigned: Vec<String> = Vec::new();
    for pair in pairs {
        let vid = pair.video_id.as_str();
        if train.contains(vid) {
            out.train.push(pair.clone());
        } else if seen.contains(vid) {
            out.seen.push(pair.clone());
        } else if val.contains(vid) {
            out.val.push(pair.clone());
        } else if !unassigned.iter().any(|u| u == vid) {
            unassigned.push(vid.to_string());
        }
    }
    if !unassigned.is_empty() {
        unassigned.sort();
        return Err(CorpusError::UnassignedVideos { ids: unassigned });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::records::CommentType;

    fn pair(pair_id: &str, video_id: &str) -> QAPair {
        QAPair {
            pair_id: pair_id.into(),
            video_id: video_id.into(),
            t: 1.0,
            type_label: CommentType::GoodExecution,
            question: "Why?".into(),
            answer: "Because.".into(),
            comment_id: format!("c-{pair_id}"),
        }
    }

    fn manifest(train: &[&str], seen: &[&str], val: &[&str]) -> SplitManifest {
        SplitManifest {
            train: train.iter().map(|s| s.to_string()).collect(),
            seen: seen.iter().map(|s| s.to_string()).collect(),
            val: val.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn partitions_two_videos() {
        let pairs = vec![pair("p1", "a"), pair("p2", "b"), pair("p3", "a"), pair("p4", "b")];
        let got = split_dataset(&pairs, &manifest(&["a"], &[], &["b"])).unwrap();
        assert_eq!(got.train.len(), 2);
        assert_eq!(got.seen.len(), 0);
        assert_eq!(got.val.len(), 2);
        assert!(got.train.iter().all(|p| p.video_id == "a"));
        assert!(got.val.iter().all(|p| p.video_id == "b"));
    }

    #[test]
    fn unknown_video_listed_in_error() {
        let pairs = vec![pair("p1", "a"), pair("p2", "mystery"), pair("p3", "ghost")];
        let err = split_dataset(&pairs, &manifest(&["a"], &[], &[])).unwrap_err();
        match err {
            CorpusError::UnassignedVideos { ids } => {
                assert_eq!(ids, vec!["ghost".to_string(), "mystery".to_string()]);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn splits_cover_input_exactly() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(0..60);
            let pairs: Vec<QAPair> = (0..n)
                .map(|i| pair(&format!("p{i}"), &format!("v{}", rng.gen_range(0..9))))
                .collect();
            let m = manifest(&["v0", "v1", "v2"], &["v3", "v4", "v5"], &["v6", "v7", "v8"]);
            let got = split_dataset(&pairs, &m).unwrap();
            assert_eq!(got.train.len() + got.seen.len() + got.val.len(), pairs.len());
            let mut recombined: Vec<&str> = got
                .train
                .iter()
                .chain(got.seen.iter())
                .chain(got.val.iter())
                .map(|p| p.pair_id.as_str())
                .collect();
            recombined.sort_unstable();
            let mut want: Vec<&str> = pairs.iter().map(|p| p.pair_id.as_str()).collect();
            want.sort_unstable();
            assert_eq!(recombined, want);
        }
    }
}
