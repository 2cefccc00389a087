use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::embedding::Embedding;
use super::encoder::TextEncoder;
use super::RetrieverError;

/// Connection settings for an embeddings endpoint speaking the common
/// `{"model", "input"} -> {"data": [{"embedding": [...]}]}` protocol.
#[derive(Debug, Clone)]
pub struct RemoteEncoderConfig {
    pub endpoint: String,
    pub model_name: String,
    /// Bearer token added when present.
    pub api_key: Option<String>,
    /// Maximum texts per request.
    pub max_batch: usize,
    /// Total attempts per request, counting the first.
    pub attempts: u32,
    /// First retry delay; doubles per retry.
    pub backoff: Duration,
    pub timeout: Duration,
}

impl RemoteEncoderConfig {
    pub fn new(endpoint: impl Into<String>, model_name: impl Into<String>) -> Self {
        RemoteEncoderConfig {
            endpoint: endpoint.into(),
            model_name: model_name.into(),
            api_key: None,
            max_batch: 128,
            attempts: 3,
            backoff: Duration::from_secs(1),
            timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    model: &'a str,
    input: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    data: Vec<EmbedItem>,
}

#[derive(Deserialize)]
struct EmbedItem {
    embedding: Vec<f64>,
}

/// Client for a remote embeddings endpoint. Vectors come back in input
/// order and are normalized to unit length on arrival.
pub struct RemoteEncoder {
    cfg: RemoteEncoderConfig,
    http: reqwest::blocking::Client,
}

impl RemoteEncoder {
    pub fn new(cfg: RemoteEncoderConfig) -> Result<Self, RetrieverError> {
        if cfg.max_batch == 0 {
            return Err(RetrieverError::InvalidConfig("max_batch must be positive".into()));
        }
        if cfg.attempts == 0 {
            return Err(RetrieverError::InvalidConfig("attempts must be positive".into()));
        }
        let http = reqwest::blocking::Client::builder()
            .timeout(cfg.timeout)
            .build()
            .map_err(|e| RetrieverError::Remote(e.to_string()))?;
        Ok(RemoteEncoder { cfg, http })
    }

    fn post_batch(&self, batch: &[String]) -> Result<Vec<Vec<f64>>, RetrieverError> {
        let body = EmbedRequest {
            model: &self.cfg.model_name,
            input: batch,
        };
        let mut last_err = RetrieverError::Remote("no attempts made".into());
        for attempt in 0..self.cfg.attempts {
            if attempt > 0 {
                std::thread::sleep(self.cfg.backoff * 2u32.pow(attempt - 1));
            }
            let sent = {
                let mut req = self.http.post(&self.cfg.endpoint).json(&body);
                if let Some(key) = &self.cfg.api_key {
                    req = req.bearer_auth(key);
                }
                req.send()
            };
            match sent {
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        let parsed: EmbedResponse = resp
                            .json()
                            .map_err(|e| RetrieverError::Remote(format!("bad response body: {e}")))?;
                        if parsed.data.len() != batch.len() {
                            return Err(RetrieverError::RemoteCount {
                                got: parsed.data.len(),
                                want: batch.len(),
                            });
                        }
                        return Ok(parsed.data.into_iter().map(|d| d.embedding).collect());
                    }
                    let body_text = resp.text().unwrap_or_default();
                    let err = RetrieverError::RemoteStatus {
                        status: status.as_u16(),
                        body: body_text,
                    };
                    if status.is_server_error() {
                        last_err = err;
                        continue;
                    }
                    return Err(err);
                }
                Err(e) => {
                    last_err = RetrieverError::Remote(e.to_string());
                    continue;
                }
            }
        }
        Err(last_err)
    }

    /// Embed texts, batching requests at `max_batch` and preserving order.
    /// All returned vectors must share one dimension.
    pub fn embed(&self, texts: &[String]) -> Result<Vec<Embedding>, RetrieverError> {
        let mut raw: Vec<Vec<f64>> = Vec::with_capacity(texts.len());
        for batch in texts.chunks(self.cfg.max_batch) {
            raw.extend(self.post_batch(batch)?);
        }
        let mut dim = None;
        let mut out = Vec::with_capacity(raw.len());
        for (i, v) in raw.into_iter().enumerate() {
            match dim {
                None => dim = Some(v.len()),
                Some(d) if d != v.len() => {
                    return Err(RetrieverError::DimMismatch {
                        left: d,
                        right: v.len(),
                    });
                }
                _ => {}
            }
            out.push(Embedding::unit(v).map_err(|e| {
                RetrieverError::Remote(format!("vector {i} cannot be normalized: {e}"))
            })?);
        }
        Ok(out)
    }
}

impl TextEncoder for RemoteEncoder {
    fn id(&self) -> String {
        format!("remote-{}", self.cfg.model_name)
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Embedding>, RetrieverError> {
        self.embed(texts)
    }
}
