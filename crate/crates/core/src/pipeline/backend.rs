//! Chat-completions backends: a live HTTP client with retries, a replay
//! client answering from a recorded transcript, and a recorder that builds
//! such transcripts.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;

/// One rendered prompt ready to send.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub template_id: String,
    pub prompt: String,
    pub temperature: f64,
}

impl ChatRequest {
    pub fn hash(&self) -> String {
        request_hash(&self.template_id, &self.prompt)
    }
}

/// Stable identity of a request: hex SHA-256 over the template id and the
/// rendered prompt. Temperature is deliberately excluded so a transcript
/// recorded at one temperature replays at any other.
pub fn request_hash(template_id: &str, prompt: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(template_id.as_bytes());
    hasher.update(b"\n");
    hasher.update(prompt.as_bytes());
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Anything that can answer a chat request. Implementations must be safe to
/// share across the pipeline's worker threads.
pub trait ChatClient: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, PipelineError>;
}

/// Connection settings for a live chat-completions endpoint.
#[derive(Debug, Clone)]
pub struct LiveBackendConfig {
    pub endpoint: String,
    pub model_name: String,
    pub api_key: Option<String>,
    /// Total attempts per request, retrying transport errors and 5xx.
    pub attempts: u32,
    /// First retry delay; doubles per further retry.
    pub backoff: Duration,
    pub timeout: Duration,
}

impl Default for LiveBackendConfig {
    fn default() -> Self {
        LiveBackendConfig {
            endpoint: String::new(),
            model_name: String::new(),
            api_key: None,
            attempts: 3,
            backoff: Duration::from_secs(1),
            timeout: Duration::from_secs(120),
        }
    }
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: Vec<WireMessage<'a>>,
    temperature: f64,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireResponseMessage,
}

#[derive(Deserialize)]
struct WireResponseMessage {
    content: Option<String>,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

pub struct LiveChatClient {
    config: LiveBackendConfig,
    client: reqwest::blocking::Client,
}

impl LiveChatClient {
    pub fn new(config: LiveBackendConfig) -> Result<Self, PipelineError> {
        if config.attempts == 0 {
            return Err(PipelineError::InvalidConfig(
                "attempts must be at least 1".into(),
            ));
        }
        if config.endpoint.is_empty() {
            return Err(PipelineError::InvalidConfig("endpoint is empty".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
        Ok(LiveChatClient { config, client })
    }
}

impl ChatClient for LiveChatClient {
    fn complete(&self, request: &ChatRequest) -> Result<String, PipelineError> {
        let body = WireRequest {
            model: &self.config.model_name,
            messages: vec![WireMessage {
                role: "user",
                content: &request.prompt,
            }],
            temperature: request.temperature,
        };
        let mut last_reason = String::new();
        for attempt in 1..=self.config.attempts {
            if attempt > 1 {
                let factor = 2u32.saturating_pow(attempt - 2);
                std::thread::sleep(self.config.backoff * factor);
            }
            let mut call = self.client.post(&self.config.endpoint).json(&body);
            if let Some(key) = &self.config.api_key {
                call = call.bearer_auth(key);
            }
            match call.send() {
                Ok(response) => {
                    let status = response.status();
                    if status.is_server_error() {
                        last_reason = format!(
                            "status {}: {}",
                            status.as_u16(),
                            response.text().unwrap_or_default()
                        );
                        continue;
                    }
                    if !status.is_success() {
                        // Client errors are not retried; backing off will
                        // not fix a bad request or key.
                        return Err(PipelineError::BackendStatus {
                            status: status.as_u16(),
                            body: response.text().unwrap_or_default(),
                        });
                    }
                    let parsed: WireResponse = response
                        .json()
                        .map_err(|e| PipelineError::Backend {
                            attempts: attempt,
                            reason: format!("bad response body: {e}"),
                        })?;
                    return parsed
                        .choices
                        .first()
                        .and_then(|c| c.message.content.clone())
                        .ok_or(PipelineError::EmptyResponse);
                }
                Err(e) => {
                    last_reason = e.to_string();
                }
            }
        }
        Err(PipelineError::Backend {
            attempts: self.config.attempts,
            reason: last_reason,
        })
    }
}

/// One line of a transcript file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub request_hash: String,
    pub response_text: String,
}

/// Load a transcript into a hash -> response map. A hash recorded several
/// times keeps its last response, so a re-recorded run wins.
pub fn load_transcript(path: impl AsRef<Path>) -> Result<HashMap<String, String>, PipelineError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| PipelineError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut map = HashMap::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| PipelineError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: TranscriptEntry =
            serde_json::from_str(&line).map_err(|e| PipelineError::Record {
                path: path.to_path_buf(),
                line: idx + 1,
                reason: e.to_string(),
            })?;
        map.insert(entry.request_hash, entry.response_text);
    }
    Ok(map)
}

pub fn save_transcript(
    path: impl AsRef<Path>,
    entries: &[TranscriptEntry],
) -> Result<(), PipelineError> {
    let path = path.as_ref();
    let io_err = |e: std::io::Error| PipelineError::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    for entry in entries {
        let json = serde_json::to_string(entry).map_err(|e| io_err(std::io::Error::other(e)))?;
        out.write_all(json.as_bytes()).map_err(io_err)?;
        out.write_all(b"\n").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Deterministic backend that answers from a recorded transcript and fails
/// on any request it has never seen.
pub struct ReplayChatClient {
    responses: HashMap<String, String>,
}

impl ReplayChatClient {
    pub fn new(responses: HashMap<String, String>) -> Self {
        ReplayChatClient { responses }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        Ok(ReplayChatClient::new(load_transcript(path)?))
    }
}

impl ChatClient for ReplayChatClient {
    fn complete(&self, request: &ChatRequest) -> Result<String, PipelineError> {
        let hash = request.hash();
        self.responses
            .get(&hash)
            .cloned()
            .ok_or(PipelineError::MissingTranscript { request_hash: hash })
    }
}

/// Wraps another client and records every successful exchange. The log is
/// the single mutable shared resource in the pipeline and is serialized
/// behind a mutex.
pub struct RecordingClient<'a> {
    inner: &'a dyn ChatClient,
    log: Mutex<Vec<TranscriptEntry>>,
}

impl<'a> RecordingClient<'a> {
    pub fn new(inner: &'a dyn ChatClient) -> Self {
        RecordingClient {
            inner,
            log: Mutex::new(Vec::new()),
        }
    }

    /// Recorded exchanges in completion order.
    pub fn into_entries(self) -> Vec<TranscriptEntry> {
        self.log.into_inner().expect("transcript log poisoned")
    }
}

impl ChatClient for RecordingClient<'_> {
    fn complete(&self, request: &ChatRequest) -> Result<String, PipelineError> {
        let response = self.inner.complete(request)?;
        self.log
            .lock()
            .expect("transcript log poisoned")
            .push(TranscriptEntry {
                request_hash: request.hash(),
                response_text: response.clone(),
            });
        Ok(response)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(template: &str, prompt: &str) -> ChatRequest {
        ChatRequest {
            template_id: template.into(),
            prompt: prompt.into(),
            temperature: 0.0,
        }
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = request_hash("gen", "ask me");
        assert_eq!(a, request_hash("gen", "ask me"));
        assert_eq!(a.len(), 64);
        assert!(a.chars().all(|c| c.is_ascii_hexdigit()));
        assert_ne!(a, request_hash("gen", "ask me twice"));
        assert_ne!(a, request_hash("verify", "ask me"));
        // The separator keeps (ab, c) and (a, bc) apart.
        assert_ne!(request_hash("ab", "c"), request_hash("a", "bc"));
    }

    #[test]
    fn replay_answers_known_and_rejects_unknown() {
        let request = req("gen", "prompt body");
        let mut map = HashMap::new();
        map.insert(request.hash(), "the answer".to_string());
        let client = ReplayChatClient::new(map);
        assert_eq!(client.complete(&request).unwrap(), "the answer");
        match client.complete(&req("gen", "other")) {
            Err(PipelineError::MissingTranscript { request_hash }) => {
                assert_eq!(request_hash, req("gen", "other").hash());
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn transcript_round_trip_last_wins() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("transcript.jsonl");
        let entries = vec![
            TranscriptEntry {
                request_hash: "h1".into(),
                response_text: "first".into(),
            },
            TranscriptEntry {
                request_hash: "h2".into(),
                response_text: "second".into(),
            },
            TranscriptEntry {
                request_hash: "h1".into(),
                response_text: "revised".into(),
            },
        ];
        save_transcript(&path, &entries).unwrap();
        let map = load_transcript(&path).unwrap();
        assert_eq!(map.len(), 2);
        assert_eq!(map["h1"], "revised");
        assert_eq!(map["h2"], "second");
    }

    #[test]
    fn transcript_rejects_malformed_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(&path, "{\"request_hash\":\"h\"}\n").unwrap();
        assert!(matches!(
            load_transcript(&path),
            Err(PipelineError::Record { line: 1, .. })
        ));
    }

    #[test]
    fn recorder_captures_successful_exchanges() {
        let request = req("gen", "prompt");
        let mut map = HashMap::new();
        map.insert(request.hash(), "answer".to_string());
        let inner = ReplayChatClient::new(map);
        let recorder = RecordingClient::new(&inner);
        recorder.complete(&request).unwrap();
        assert!(recorder.complete(&req("gen", "unknown")).is_err());
        let entries = recorder.into_entries();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].request_hash, request.hash());
        assert_eq!(entries[0].response_text, "answer");
    }

    #[test]
    fn live_client_rejects_bad_config() {
        assert!(LiveChatClient::new(LiveBackendConfig {
            endpoint: "http://localhost:1".into(),
            attempts: 0,
            ..LiveBackendConfig::default()
        })
        .is_err());
        assert!(LiveChatClient::new(LiveBackendConfig::default()).is_err());
    }
}
