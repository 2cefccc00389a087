//! One module per subcommand plus the helpers they share.

pub mod baseline;
pub mod check;
pub mod convert;
pub mod evaluate;
pub mod pools;
pub mod report;
pub mod train;

use std::path::Path;

use elicit_core::corpus::{load_qa_pairs, QAPair};
use elicit_core::eval::TableColumn;
use elicit_core::retriever::{load_model, TextEncoder};

use crate::backend::prepare_remote;
use crate::config::{EncoderChoice, RunConfig, Split};
use crate::error::CliError;

/// Table layout shared by every metrics printout: one recall column per
/// cutoff, then the rank aggregates.
fn columns_for(ks: &[u32]) -> Vec<TableColumn> {
    let mut columns: Vec<TableColumn> = ks.iter().map(|&k| TableColumn::Recall(k)).collect();
    columns.push(TableColumn::MeanRank);
    columns.push(TableColumn::MedianRank);
    columns
}

/// Question-answer pairs of one split, or all three concatenated.
fn load_split_pairs(config: &RunConfig, split: Split) -> Result<Vec<QAPair>, CliError> {
    let splits: &[Split] = match split {
        Split::All => &[Split::Train, Split::Seen, Split::Val],
        Split::Train => &[Split::Train],
        Split::Seen => &[Split::Seen],
        Split::Val => &[Split::Val],
    };
    let mut pairs = Vec::new();
    for &s in splits {
        pairs.extend(load_qa_pairs(config.qa_file(s))?);
    }
    Ok(pairs)
}

/// The encoder the evaluation config points at.
fn load_encoder(config: &RunConfig) -> Result<Box<dyn TextEncoder>, CliError> {
    match config.eval.encoder {
        EncoderChoice::Checkpoint => {
            let path = config.checkpoint_file();
            if !path.exists() {
                return Err(CliError::Validation(format!(
                    "no checkpoint at {}; run the train subcommand first",
                    path.display()
                )));
            }
            Ok(Box::new(load_model(path)?))
        }
        EncoderChoice::Remote => {
            let section = config.embeddings.as_ref().ok_or_else(|| {
                CliError::Validation(
                    "eval.encoder = \"remote\" needs an [embeddings] section".into(),
                )
            })?;
            Ok(Box::new(prepare_remote(section)?))
        }
    }
}

fn ensure_output_dir(config: &RunConfig) -> Result<(), CliError> {
    std::fs::create_dir_all(&config.paths.output_dir).map_err(|e| {
        CliError::Validation(format!(
            "cannot create {}: {e}",
            config.paths.output_dir.display()
        ))
    })
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Internal(format!("cannot serialize {}: {e}", path.display())))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}
