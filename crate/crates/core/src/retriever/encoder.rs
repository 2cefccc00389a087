use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use unicode_normalization::UnicodeNormalization;

use super::embedding::Embedding;
use super::RetrieverError;
use crate::hash::fnv1a_64;

pub const DEFAULT_BUCKETS: usize = 65_536;
pub const DEFAULT_DIM: usize = 64;

/// Map text to hash-bucket indices: NFKC-normalize, lowercase, split on runs
/// of non-alphanumeric characters, then hash each token. Repeated tokens keep
/// their multiplicity.
pub fn tokenize(text: &str, buckets: usize) -> Vec<usize> {
    assert!(buckets > 0, "bucket count must be positive");
    let normalized: String = text.nfkc().collect::<String>().to_lowercase();
    let mut out = Vec::new();
    let mut token = String::new();
    for ch in normalized.chars() {
        if ch.is_alphanumeric() {
            token.push(ch);
        } else if !token.is_empty() {
            out.push((fnv1a_64(token.as_bytes()) % buckets as u64) as usize);
            token.clear();
        }
    }
    if !token.is_empty() {
        out.push((fnv1a_64(token.as_bytes()) % buckets as u64) as usize);
    }
    out
}

/// Anything that can embed a batch of texts for ranking.
pub trait TextEncoder {
    /// Short identifier recorded in report metadata.
    fn id(&self) -> String;
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Embedding>, RetrieverError>;
}

/// Hashed bag-of-tokens encoder: a learned row per bucket, mean-pooled over
/// a text's tokens and normalized to unit length.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderModel {
    pub(crate) buckets: usize,
    pub(crate) dim: usize,
    pub(crate) seed: u64,
    pub(crate) weights: Vec<f64>,
}

impl EncoderModel {
    /// Fresh model with rows drawn from N(0, 1/sqrt(dim)), reproducible from
    /// the seed.
    pub fn init(buckets: usize, dim: usize, seed: u64) -> Self {
        assert!(buckets > 0 && dim > 0, "model dimensions must be positive");
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (dim as f64).sqrt();
        let normal = StandardNormal;
        let weights = (0..buckets * dim)
            .map(|_| {
                let z: f64 = normal.sample(&mut rng);
                z * scale
            })
            .collect();
        EncoderModel {
            buckets,
            dim,
            seed,
            weights,
        }
    }

    pub fn buckets(&self) -> usize {
        self.buckets
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn row(&self, bucket: usize) -> &[f64] {
        &self.weights[bucket * self.dim..(bucket + 1) * self.dim]
    }

    /// Mutable view of one bucket row, e.g. for finite-difference probes.
    pub fn row_mut(&mut self, bucket: usize) -> &mut [f64] {
        &mut self.weights[bucket * self.dim..(bucket + 1) * self.dim]
    }

    /// Mean of the weight rows selected by `tokens` (with multiplicity).
    pub(crate) fn mean_vector(&self, tokens: &[usize]) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for &b in tokens {
            let row = self.row(b);
            for (acc, w) in v.iter_mut().zip(row) {
                *acc += w;
            }
        }
        let n = tokens.len() as f64;
        for x in &mut v {
            *x /= n;
        }
        v
    }

    /// Embed one text. A text with no tokens maps to the first basis vector
    /// so every input has a well-defined unit embedding.
    pub fn encode(&self, text: &str) -> Embedding {
        let tokens = tokenize(text, self.buckets);
        if tokens.is_empty() {
            return Embedding::basis(self.dim, 0);
        }
        match Embedding::unit(self.mean_vector(&tokens)) {
            Ok(e) => e,
            // Unreachable with Gaussian-initialized weights; kept total.
            Err(_) => Embedding::basis(self.dim, 0),
        }
    }
}

impl TextEncoder for EncoderModel {
    fn id(&self) -> String {
        format!("desk-{}x{}-seed{}", self.buckets, self.dim, self.seed)
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Embedding>, RetrieverError> {
        Ok(texts.iter().map(|t| self.encode(t)).collect())
    }
}
