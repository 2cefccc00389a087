//! Chat and embedding backends built from the run configuration. Live
//! backends refuse to start without ELICIT_API_KEY so no request is ever
//! attempted unauthenticated.

use std::path::PathBuf;

use elicit_core::pipeline::{ChatClient, LiveBackendConfig, LiveChatClient, ReplayChatClient};
use elicit_core::retriever::{RemoteEncoder, RemoteEncoderConfig};

use crate::config::{BackendMode, BackendSection, EmbeddingsSection};
use crate::error::CliError;

pub const API_KEY_VAR: &str = "ELICIT_API_KEY";

fn api_key() -> Result<String, CliError> {
    std::env::var(API_KEY_VAR)
        .ok()
        .filter(|key| !key.is_empty())
        .ok_or_else(|| {
            CliError::Validation(format!(
                "live backends require the {API_KEY_VAR} environment variable"
            ))
        })
}

/// A chat backend ready to answer requests: either a replay transcript or a
/// live endpoint, the latter optionally asking for its traffic to be
/// recorded to `record`.
pub struct PreparedChat {
    replay: Option<ReplayChatClient>,
    live: Option<LiveChatClient>,
    pub record: Option<PathBuf>,
}

impl PreparedChat {
    pub fn prepare(section: &BackendSection) -> Result<Self, CliError> {
        match section.mode {
            BackendMode::Replay => {
                if section.transcript.as_os_str().is_empty() {
                    return Err(CliError::Validation(
                        "replay mode needs chat.transcript to point at a recorded file".into(),
                    ));
                }
                Ok(PreparedChat {
                    replay: Some(ReplayChatClient::from_file(&section.transcript)?),
                    live: None,
                    record: None,
                })
            }
            BackendMode::Live => {
                if section.endpoint.is_empty() {
                    return Err(CliError::Validation("live mode needs chat.endpoint".into()));
                }
                let live = LiveChatClient::new(LiveBackendConfig {
                    endpoint: section.endpoint.clone(),
                    model_name: section.model.clone(),
                    api_key: Some(api_key()?),
                    attempts: section.attempts,
                    ..LiveBackendConfig::default()
                })?;
                Ok(PreparedChat {
                    replay: None,
                    live: Some(live),
                    record: section.record.clone(),
                })
            }
        }
    }

    pub fn client(&self) -> &dyn ChatClient {
        if let Some(replay) = &self.replay {
            replay
        } else {
            self.live.as_ref().expect("prepared backend holds a client")
        }
    }
}

/// Build the remote embedding encoder; requires the API key like any other
/// live backend.
pub fn prepare_remote(section: &EmbeddingsSection) -> Result<RemoteEncoder, CliError> {
    if section.endpoint.is_empty() {
        return Err(CliError::Validation(
            "remote embeddings need embeddings.endpoint".into(),
        ));
    }
    let mut cfg = RemoteEncoderConfig::new(&section.endpoint, &section.model);
    cfg.api_key = Some(api_key()?);
    cfg.max_batch = section.max_batch;
    cfg.attempts = section.attempts;
    Ok(RemoteEncoder::new(cfg)?)
}
