use rand::seq::SliceRandom;
use rand::SeedableRng;

use super::encoder::{tokenize, EncoderModel, DEFAULT_BUCKETS, DEFAULT_DIM};
use super::loss::loss_gradients;
use super::RetrieverError;

const ADAM_EPS: f64 = 1e-8;

/// Settings for the contrastive training loop.
///
/// `learning_rate` defaults to 1e-2, which suits the hashed mean-pool
/// encoder; transformer-style backends typically want around 5e-5.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Softmax temperature of the contrastive loss.
    pub tau: f64,
    pub weight_decay: f64,
    pub betas: (f64, f64),
    pub shuffle_seed: u64,
    pub buckets: usize,
    pub dim: usize,
    pub init_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 512,
            epochs: 10,
            learning_rate: 1e-2,
            tau: 0.05,
            weight_decay: 0.01,
            betas: (0.9, 0.999),
            shuffle_seed: 0,
            buckets: DEFAULT_BUCKETS,
            dim: DEFAULT_DIM,
            init_seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), RetrieverError> {
        let bad = |msg: String| Err(RetrieverError::InvalidConfig(msg));
        if self.batch_size < 2 {
            return bad(format!("batch_size must be at least 2, got {}", self.batch_size));
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return bad(format!("weight_decay must be non-negative, got {}", self.weight_decay));
        }
        for beta in [self.betas.0, self.betas.1] {
            if !(0.0..1.0).contains(&beta) {
                return bad(format!("betas must lie in [0, 1), got {beta}"));
            }
        }
        if self.buckets == 0 || self.dim == 0 {
            return bad("buckets and dim must be positive".into());
        }
        Ok(())
    }
}

/// Trained model plus the mean loss recorded at the end of each epoch.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: EncoderModel,
    pub epoch_losses: Vec<f64>,
}

/// Train a fresh encoder (initialized from the config seed) on
/// (question, comment) pairs.
pub fn train(pairs: &[(String, String)], config: &TrainConfig) -> Result<TrainOutcome, RetrieverError> {
    config.validate()?;
    let init = EncoderModel::init(config.buckets, config.dim, config.init_seed);
    train_model(init, pairs, config)
}

/// Train from an explicit starting model.
///
/// Optimizer state covers exactly the buckets reachable from the corpus;
/// unreachable rows keep their initial values. Batches are drawn in a
/// seeded shuffle per epoch and a trailing remainder smaller than 2 is
/// dropped, since a single pair yields no contrastive signal.
pub fn train_model(
    mut model: EncoderModel,
    pairs: &[(String, String)],
    config: &TrainConfig,
) -> Result<TrainOutcome, RetrieverError> {
    config.validate()?;
    if pairs.len() < 2 {
        return Err(RetrieverError::TooFewPairs(pairs.len()));
    }
    if model.buckets != config.buckets || model.dim != config.dim {
        return Err(RetrieverError::InvalidConfig(format!(
            "model shape {}x{} does not match config {}x{}",
            model.buckets, model.dim, config.buckets, config.dim
        )));
    }

    let mut active: Vec<usize> = {
        let mut set = std::collections::BTreeSet::new();
        for (q, c) in pairs {
            set.extend(tokenize(q, config.buckets));
            set.extend(tokenize(c, config.buckets));
        }
        set.into_iter().collect()
    };
    active.shrink_to_fit();
    let dim = config.dim;
    let mut m = vec![0.0f64; active.len() * dim];
    let mut v = vec![0.0f64; active.len() * dim];

    let n = pairs.len();
    let full = n / config.batch_size;
    let rem = n % config.batch_size;
    let batches_per_epoch = full + usize::from(rem >= 2);
    if rem == 1 {
        log::warn!("dropping a remainder batch of 1 pair each epoch");
    }
    if batches_per_epoch == 0 {
        // n >= 2 guarantees at least one batch (rem == n when batch_size > n).
        return Err(RetrieverError::TooFewPairs(n));
    }
    let total_steps = (config.epochs * batches_per_epoch) as f64;

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.shuffle_seed);
    let (beta1, beta2) = config.betas;
    let mut step = 0usize;
    let mut epoch_losses = Vec::with_capacity(config.epochs);

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut counted = 0usize;
        for chunk in order.chunks(config.batch_size) {
            if chunk.len() < 2 {
                continue;
            }
            let q_batch: Vec<String> = chunk.iter().map(|&i| pairs[i].0.clone()).collect();
            let c_batch: Vec<String> = chunk.iter().map(|&i| pairs[i].1.clone()).collect();
            let (loss, grad) = loss_gradients(&q_batch, &c_batch, &model, config.tau)?;
            epoch_loss += loss;
            counted += 1;

            let lr = config.learning_rate * (total_steps - step as f64) / total_steps;
            step += 1;
            let t = step as i32;
            let bias1 = 1.0 - beta1.powi(t);
            let bias2 = 1.0 - beta2.powi(t);
            // Every corpus-reachable row steps, with a zero gradient where
            // the batch did not touch it, so moments decay exactly as in the
            // dense update.
            for (slot, &bucket) in active.iter().enumerate() {
                let grad_row = grad.row(bucket);
                let w_base = bucket * dim;
                let s_base = slot * dim;
                for d in 0..dim {
                    let g = grad_row.map_or(0.0, |r| r[d]);
                    let mi = &mut m[s_base + d];
                    let vi = &mut v[s_base + d];
                    *mi = beta1 * *mi + (1.0 - beta1) * g;
                    *vi = beta2 * *vi + (1.0 - beta2) * g * g;
                    let m_hat = *mi / bias1;
                    let v_hat = *vi / bias2;
                    let w = &mut model.weights[w_base + d];
                    *w -= lr * (m_hat / (v_hat.sqrt() + ADAM_EPS) + config.weight_decay * *w);
                }
            }
        }
        epoch_losses.push(epoch_loss / counted as f64);
    }

    Ok(TrainOutcome { model, epoch_losses })
}
