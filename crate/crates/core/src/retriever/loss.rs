use std::collections::BTreeMap;

use super::embedding::Embedding;
use super::encoder::{tokenize, EncoderModel};
use super::RetrieverError;

/// Gradient of the batch loss with respect to encoder weights, holding rows
/// only for buckets that actually appear in the batch.
#[derive(Debug, Clone, Default)]
pub struct SparseGradient {
    rows: BTreeMap<usize, Vec<f64>>,
}

impl SparseGradient {
    pub fn rows(&self) -> &BTreeMap<usize, Vec<f64>> {
        &self.rows
    }

    pub fn row(&self, bucket: usize) -> Option<&[f64]> {
        self.rows.get(&bucket).map(Vec::as_slice)
    }

    pub fn norm(&self) -> f64 {
        self.rows
            .values()
            .flat_map(|r| r.iter())
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }

    fn add_scaled(&mut self, bucket: usize, dim: usize, contribution: &[f64], scale: f64) {
        let row = self.rows.entry(bucket).or_insert_with(|| vec![0.0; dim]);
        for (acc, g) in row.iter_mut().zip(contribution) {
            *acc += g * scale;
        }
    }
}

fn check_tau(tau: f64) -> Result<(), RetrieverError> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(RetrieverError::InvalidConfig(format!(
            "temperature must be positive and finite, got {tau}"
        )));
    }
    Ok(())
}

/// Scaled similarity matrix, per-row log-sum-exp terms, softmax rows, and the
/// batch loss. Shared by the loss and gradient entry points so both see the
/// same arithmetic.
struct Forward {
    probs: Vec<Vec<f64>>,
    loss: f64,
}

fn forward(q: &[Vec<f64>], c: &[Vec<f64>], tau: f64) -> Forward {
    let b = q.len();
    let mut probs = Vec::with_capacity(b);
    let mut loss_sum = 0.0;
    for i in 0..b {
        let z: Vec<f64> = c
            .iter()
            .map(|cj| q[i].iter().zip(cj).map(|(x, y)| x * y).sum::<f64>() / tau)
            .collect();
        let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let m_idx = z.iter().position(|&v| v == m).expect("nonempty row");
        // The max element contributes exp(0) = 1 exactly, so the sum is
        // 1 + rest and ln_1p keeps precision when rest is tiny. Both
        // (m - z_ii) and ln_1p(rest >= 0) are non-negative in floating
        // point, so the loss can never round below zero.
        let exps: Vec<f64> = z.iter().map(|&v| (v - m).exp()).collect();
        let rest: f64 = exps
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != m_idx)
            .map(|(_, &e)| e)
            .sum();
        let denom = 1.0 + rest;
        loss_sum += (m - z[i]) + rest.ln_1p();
        probs.push(exps.into_iter().map(|e| e / denom).collect());
    }
    Forward {
        probs,
        loss: loss_sum / b as f64,
    }
}

/// Contrastive batch loss over paired unit embeddings: each query scored
/// against every comment in the batch, correct pairs on the diagonal.
pub fn info_nce_loss(
    queries: &[Embedding],
    comments: &[Embedding],
    tau: f64,
) -> Result<f64, RetrieverError> {
    check_tau(tau)?;
    if queries.is_empty() {
        return Err(RetrieverError::EmptyBatch);
    }
    if queries.len() != comments.len() {
        return Err(RetrieverError::BatchMismatch {
            queries: queries.len(),
            comments: comments.len(),
        });
    }
    let dim = queries[0].dim();
    for e in queries.iter().chain(comments) {
        if e.dim() != dim {
            return Err(RetrieverError::DimMismatch {
                left: dim,
                right: e.dim(),
            });
        }
    }
    let q: Vec<Vec<f64>> = queries.iter().map(|e| e.values().to_vec()).collect();
    let c: Vec<Vec<f64>> = comments.iter().map(|e| e.values().to_vec()).collect();
    Ok(forward(&q, &c, tau).loss)
}

/// One side of the batch prepared for backpropagation.
struct Encoded {
    tokens: Vec<usize>,
    /// Norm of the mean-pooled vector before normalization; zero marks a
    /// text whose embedding is constant (no tokens), which carries no
    /// gradient.
    pre_norm: f64,
    unit: Vec<f64>,
}

fn encode_for_grad(model: &EncoderModel, text: &str) -> Encoded {
    let tokens = tokenize(text, model.buckets);
    if tokens.is_empty() {
        let mut unit = vec![0.0; model.dim];
        unit[0] = 1.0;
        return Encoded {
            tokens,
            pre_norm: 0.0,
            unit,
        };
    }
    let v = model.mean_vector(&tokens);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        let mut unit = vec![0.0; model.dim];
        unit[0] = 1.0;
        return Encoded {
            tokens,
            pre_norm: 0.0,
            unit,
        };
    }
    let unit = v.iter().map(|x| x / norm).collect();
    Encoded {
        tokens,
        pre_norm: norm,
        unit,
    }
}

/// Scatter the gradient with respect to one text's unit embedding back to
/// the weight rows through normalization and mean pooling.
fn backprop_text(enc: &Encoded, d_unit: &[f64], dim: usize, out: &mut SparseGradient) {
    if enc.pre_norm == 0.0 {
        return;
    }
    let proj: f64 = d_unit.iter().zip(&enc.unit).map(|(g, u)| g * u).sum();
    let d_mean: Vec<f64> = d_unit
        .iter()
        .zip(&enc.unit)
        .map(|(g, u)| (g - proj * u) / enc.pre_norm)
        .collect();
    let scale = 1.0 / enc.tokens.len() as f64;
    for &bucket in &enc.tokens {
        out.add_scaled(bucket, dim, &d_mean, scale);
    }
}

/// Batch loss and its exact gradient with respect to the encoder weights,
/// differentiating through mean pooling and normalization.
pub fn loss_gradients(
    q_texts: &[String],
    c_texts: &[String],
    model: &EncoderModel,
    tau: f64,
) -> Result<(f64, SparseGradient), RetrieverError> {
    check_tau(tau)?;
    if q_texts.is_empty() {
        return Err(RetrieverError::EmptyBatch);
    }
    if q_texts.len() != c_texts.len() {
        return Err(RetrieverError::BatchMismatch {
            queries: q_texts.len(),
            comments: c_texts.len(),
        });
    }
    let b = q_texts.len();
    let dim = model.dim;
    let q_enc: Vec<Encoded> = q_texts.iter().map(|t| encode_for_grad(model, t)).collect();
    let c_enc: Vec<Encoded> = c_texts.iter().map(|t| encode_for_grad(model, t)).collect();
    let q_units: Vec<Vec<f64>> = q_enc.iter().map(|e| e.unit.clone()).collect();
    let c_units: Vec<Vec<f64>> = c_enc.iter().map(|e| e.unit.clone()).collect();
    let fwd = forward(&q_units, &c_units, tau);

    // d loss / d similarity(i,j) = (p_ij - [i == j]) / (B * tau).
    let coeff = 1.0 / (b as f64 * tau);
    let mut grad = SparseGradient::default();
    let mut d_c_units = vec![vec![0.0; dim]; b];
    for i in 0..b {
        let mut d_q_unit = vec![0.0; dim];
        for j in 0..b {
            let g = (fwd.probs[i][j] - if i == j { 1.0 } else { 0.0 }) * coeff;
            for d in 0..dim {
                d_q_unit[d] += g * c_units[j][d];
                d_c_units[j][d] += g * q_units[i][d];
            }
        }
        backprop_text(&q_enc[i], &d_q_unit, dim, &mut grad);
    }
    for j in 0..b {
        backprop_text(&c_enc[j], &d_c_units[j], dim, &mut grad);
    }
    Ok((fwd.loss, grad))
}
