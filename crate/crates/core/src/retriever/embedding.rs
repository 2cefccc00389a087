use super::RetrieverError;

/// A unit-length dense text representation.
///
/// Construction always normalizes, so similarity reduces to a dot product.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    v: Vec<f64>,
}

impl Embedding {
    /// Normalize an arbitrary vector to unit length.
    pub fn unit(mut v: Vec<f64>) -> Result<Self, RetrieverError> {
        if v.is_empty() {
            return Err(RetrieverError::InvalidConfig("empty embedding".into()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(RetrieverError::NonFinite("embedding vector".into()));
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(RetrieverError::ZeroNorm);
        }
        for x in &mut v {
            *x /= norm;
        }
        Ok(Embedding { v })
    }

    /// The standard basis vector with a 1 at `index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dim {dim}");
        let mut v = vec![0.0; dim];
        v[index] = 1.0;
        Embedding { v }
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }
}

/// Cosine similarity of two embeddings; a plain dot product because both
/// sides are unit length.
pub fn cosine_sim(a: &Embedding, b: &Embedding) -> Result<f64, RetrieverError> {
    if a.dim() != b.dim() {
        return Err(RetrieverError::DimMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(a.v.iter().zip(b.v.iter()).map(|(x, y)| x * y).sum())
}
