//! train: fit the hashing encoder on the train split and write the
//! checkpoint plus the per-epoch loss curve.

use elicit_core::corpus::load_qa_pairs;
use elicit_core::retriever::{save_model, train, TextEncoder};

use crate::config::{RunConfig, Split};
use crate::error::CliError;

use super::{ensure_output_dir, write_json};

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let pairs = load_qa_pairs(config.qa_file(Split::Train))?;
    let examples: Vec<(String, String)> = pairs
        .iter()
        .map(|p| (p.question.clone(), p.answer.clone()))
        .collect();

    let outcome = train(&examples, &config.train.to_core())?;

    ensure_output_dir(config)?;
    let checkpoint = config.checkpoint_file();
    if let Some(parent) = checkpoint.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| {
            CliError::Validation(format!("cannot create {}: {e}", parent.display()))
        })?;
    }
    save_model(&checkpoint, &outcome.model)?;
    write_json(&config.losses_file(), &outcome.epoch_losses)?;

    let first = outcome.epoch_losses.first().copied().unwrap_or(f64::NAN);
    let last = outcome.epoch_losses.last().copied().unwrap_or(f64::NAN);
    println!(
        "trained {} on {} pairs for {} epochs, loss {first:.4} -> {last:.4}",
        outcome.model.id(),
        examples.len(),
        outcome.epoch_losses.len()
    );
    println!("wrote {}", checkpoint.display());
    Ok(())
}
