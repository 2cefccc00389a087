//! Declarative run configuration: one TOML document drives every
//! subcommand, and each key can be overridden from the command line with
//! `--set section.key=value`.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use elicit_core::eval::DEFAULT_RECALL_KS;
use elicit_core::pipeline::PipelineConfig;
use elicit_core::pool::DEFAULT_POOL_SIZE;
use elicit_core::retriever::{TrainConfig, DEFAULT_BUCKETS, DEFAULT_DIM};

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub paths: PathsConfig,
    #[serde(default)]
    pub pipeline: PipelineSection,
    #[serde(default)]
    pub chat: BackendSection,
    /// Shallow-check backend; falls back to `[chat]` when absent.
    #[serde(default)]
    pub checker: Option<BackendSection>,
    #[serde(default)]
    pub embeddings: Option<EmbeddingsSection>,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub pool: PoolSection,
    #[serde(default)]
    pub eval: EvalSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    #[serde(default)]
    pub commentary: PathBuf,
    #[serde(default)]
    pub descriptions: PathBuf,
    #[serde(default)]
    pub manifest: PathBuf,
    #[serde(default)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSection {
    pub window_seconds: f64,
    pub grouping_delta: f64,
    pub min_words: usize,
    pub failure_threshold: f64,
    pub gen_temperature: f64,
    pub verify_temperature: f64,
    pub checker_temperature: f64,
    pub max_in_flight: usize,
}

impl Default for PipelineSection {
    fn default() -> Self {
        let core = PipelineConfig::default();
        PipelineSection {
            window_seconds: core.window_seconds,
            grouping_delta: core.grouping_delta,
            min_words: core.min_words,
            failure_threshold: core.failure_threshold,
            gen_temperature: core.gen_temperature,
            verify_temperature: core.verify_temperature,
            checker_temperature: core.checker_temperature,
            max_in_flight: core.max_in_flight,
        }
    }
}

impl PipelineSection {
    pub fn to_core(&self) -> PipelineConfig {
        PipelineConfig {
            window_seconds: self.window_seconds,
            grouping_delta: self.grouping_delta,
            min_words: self.min_words,
            failure_threshold: self.failure_threshold,
            gen_temperature: self.gen_temperature,
            verify_temperature: self.verify_temperature,
            checker_temperature: self.checker_temperature,
            max_in_flight: self.max_in_flight,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendMode {
    /// Answer requests from a recorded transcript; no network.
    Replay,
    /// Call the configured endpoint; requires ELICIT_API_KEY.
    Live,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendSection {
    pub mode: BackendMode,
    #[serde(default)]
    pub endpoint: String,
    #[serde(default)]
    pub model: String,
    /// Transcript file answering requests in replay mode.
    #[serde(default)]
    pub transcript: PathBuf,
    /// When set in live mode, successful traffic is recorded here.
    #[serde(default)]
    pub record: Option<PathBuf>,
    #[serde(default = "default_attempts")]
    pub attempts: u32,
}

fn default_attempts() -> u32 {
    3
}

impl Default for BackendSection {
    fn default() -> Self {
        BackendSection {
            mode: BackendMode::Replay,
            endpoint: String::new(),
            model: String::new(),
            transcript: PathBuf::new(),
            record: None,
            attempts: default_attempts(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingsSection {
    pub endpoint: String,
    pub model: String,
    #[serde(default = "default_max_batch")]
    pub max_batch: usize,
    #[serde(default = "default_attempts")]
    pub attempts: u32,
}

fn default_max_batch() -> usize {
    128
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub tau: f64,
    pub weight_decay: f64,
    pub shuffle_seed: u64,
    pub buckets: usize,
    pub dim: usize,
    pub init_seed: u64,
    /// Checkpoint location; defaults to encoder.bin under the output dir.
    #[serde(default)]
    pub checkpoint: Option<PathBuf>,
}

impl Default for TrainSection {
    fn default() -> Self {
        let core = TrainConfig::default();
        TrainSection {
            batch_size: core.batch_size,
            epochs: core.epochs,
            learning_rate: core.learning_rate,
            tau: core.tau,
            weight_decay: core.weight_decay,
            shuffle_seed: core.shuffle_seed,
            buckets: DEFAULT_BUCKETS,
            dim: DEFAULT_DIM,
            init_seed: core.init_seed,
            checkpoint: None,
        }
    }
}

impl TrainSection {
    pub fn to_core(&self) -> TrainConfig {
        TrainConfig {
            batch_size: self.batch_size,
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            tau: self.tau,
            weight_decay: self.weight_decay,
            betas: TrainConfig::default().betas,
            shuffle_seed: self.shuffle_seed,
            buckets: self.buckets,
            dim: self.dim,
            init_seed: self.init_seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Seen,
    Val,
    All,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Seen => "seen",
            Split::Val => "val",
            Split::All => "all",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoolSection {
    pub size: usize,
    pub seed: u64,
    /// Which split's segments get pools.
    pub split: Split,
}

impl Default for PoolSection {
    fn default() -> Self {
        PoolSection {
            size: DEFAULT_POOL_SIZE,
            seed: 0,
            split: Split::Val,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderChoice {
    Checkpoint,
    Remote,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub ks: Vec<u32>,
    pub reps: u32,
    pub seed: u64,
    pub split: Split,
    /// Which encoder ranks pools for evaluate and the gold baseline.
    pub encoder: EncoderChoice,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            ks: DEFAULT_RECALL_KS.to_vec(),
            reps: 3,
            seed: 0,
            split: Split::Val,
            encoder: EncoderChoice::Checkpoint,
        }
    }
}

impl RunConfig {
    /// Parse a config file and apply `--set` overrides in order.
    pub fn load(path: &Path, overrides: &[String]) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut value: toml::Table = text.parse().map_err(|e| {
            CliError::Validation(format!("config {}: {e}", path.display()))
        })?;
        for assignment in overrides {
            apply_override(&mut value, assignment)?;
        }
        let config: RunConfig = toml::Value::Table(value).try_into().map_err(|e| {
            CliError::Validation(format!("config {}: {e}", path.display()))
        })?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.pipeline
            .to_core()
            .validate()
            .map_err(|e| CliError::Validation(e.to_string()))?;
        if self.pool.size == 0 {
            return Err(CliError::Validation("pool.size must be positive".into()));
        }
        if self.eval.reps == 0 {
            return Err(CliError::Validation("eval.reps must be positive".into()));
        }
        if self.eval.ks.is_empty() || self.eval.ks.contains(&0) {
            return Err(CliError::Validation(
                "eval.ks must list positive cutoffs".into(),
            ));
        }
        Ok(())
    }

    pub fn output_file(&self, name: &str) -> PathBuf {
        self.paths.output_dir.join(name)
    }

    pub fn qa_file(&self, split: Split) -> PathBuf {
        self.output_file(&format!("qa_{}.jsonl", split.name()))
    }

    pub fn formatted_file(&self) -> PathBuf {
        self.output_file("formatted.jsonl")
    }

    pub fn scenarios_file(&self) -> PathBuf {
        self.output_file("scenarios.json")
    }

    pub fn provenance_file(&self) -> PathBuf {
        self.output_file("provenance.jsonl")
    }

    pub fn checkpoint_file(&self) -> PathBuf {
        self.train
            .checkpoint
            .clone()
            .unwrap_or_else(|| self.output_file("encoder.bin"))
    }

    pub fn losses_file(&self) -> PathBuf {
        self.output_file("train_losses.json")
    }

    pub fn pools_file(&self) -> PathBuf {
        self.output_file("pools.jsonl")
    }
}

/// Apply one `section.key=value` assignment. The assignment is parsed as a
/// small TOML document, so values use TOML syntax (arrays included); a bare
/// word that fails to parse is retried as a string.
fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (key, value) = assignment.split_once('=').ok_or_else(|| {
        CliError::Validation(format!("override '{assignment}' is not of the form key=value"))
    })?;
    let key = key.trim();
    let value = value.trim();
    if key.is_empty() || key.split('.').any(|part| part.is_empty()) {
        return Err(CliError::Validation(format!(
            "override '{assignment}' has an invalid key"
        )));
    }
    let parsed: toml::Table = format!("{key} = {value}")
        .parse()
        .or_else(|_| format!("{key} = {value:?}").parse())
        .map_err(|e| {
            CliError::Validation(format!("override '{assignment}' is not valid: {e}"))
        })?;
    merge(table, parsed);
    Ok(())
}

/// Recursive table merge; scalars and arrays on the right replace.
fn merge(base: &mut toml::Table, update: toml::Table) {
    for (key, value) in update {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(u)) => merge(b, u),
            (slot, value) => {
                if let Some(slot) = slot {
                    *slot = value;
                } else {
                    base.insert(key, value);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_config(dir: &tempfile::TempDir, text: &str) -> PathBuf {
        let path = dir.path().join("run.toml");
        std::fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn empty_config_gets_documented_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(&dir, "");
        let config = RunConfig::load(&path, &[]).unwrap();
        assert_eq!(config.pipeline.window_seconds, 7.0);
        assert_eq!(config.pipeline.min_words, 8);
        assert_eq!(config.pipeline.failure_threshold, 0.05);
        assert_eq!(config.pool.size, 50);
        assert_eq!(config.train.batch_size, 512);
        assert_eq!(config.train.epochs, 10);
        assert_eq!(config.train.tau, 0.05);
        assert_eq!(config.eval.ks, vec![1, 5]);
        assert_eq!(config.eval.reps, 3);
        assert_eq!(config.eval.split, Split::Val);
    }

    #[test]
    fn overrides_replace_single_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(&dir, "[pool]\nsize = 40\nseed = 9\n");
        let config = RunConfig::load(
            &path,
            &[
                "pool.size=60".into(),
                "eval.ks=[1, 5, 10]".into(),
                "chat.mode=live".into(),
                "paths.output_dir=out/run1".into(),
            ],
        )
        .unwrap();
        assert_eq!(config.pool.size, 60);
        assert_eq!(config.pool.seed, 9, "untouched keys survive");
        assert_eq!(config.eval.ks, vec![1, 5, 10]);
        assert_eq!(config.chat.mode, BackendMode::Live);
        assert_eq!(config.paths.output_dir, PathBuf::from("out/run1"));
    }

    #[test]
    fn bad_overrides_and_unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(&dir, "");
        assert!(RunConfig::load(&path, &["no-equals".into()]).is_err());
        assert!(RunConfig::load(&path, &["pool..size=1".into()]).is_err());
        assert!(RunConfig::load(&path, &["pool.sizes=1".into()]).is_err());
        let path = write_config(&dir, "[pool]\nlength = 50\n");
        assert!(RunConfig::load(&path, &[]).is_err());
    }

    #[test]
    fn numeric_ranges_are_validated() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(&dir, "");
        assert!(RunConfig::load(&path, &["pipeline.failure_threshold=1.5".into()]).is_err());
        assert!(RunConfig::load(&path, &["pool.size=0".into()]).is_err());
        assert!(RunConfig::load(&path, &["eval.reps=0".into()]).is_err());
        assert!(RunConfig::load(&path, &["eval.ks=[]".into()]).is_err());
    }

    #[test]
    fn derived_paths_follow_the_output_dir() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(&dir, "[paths]\noutput_dir = \"work\"\n");
        let config = RunConfig::load(&path, &[]).unwrap();
        assert_eq!(config.qa_file(Split::Val), PathBuf::from("work/qa_val.jsonl"));
        assert_eq!(config.checkpoint_file(), PathBuf::from("work/encoder.bin"));
        let config = RunConfig::load(&path, &["train.checkpoint=\"m.bin\"".into()]).unwrap();
        assert_eq!(config.checkpoint_file(), PathBuf::from("m.bin"));
    }
}
