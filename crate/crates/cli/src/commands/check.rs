//! retriever-check: rank every question of a split against all answers of
//! that split (each question has exactly one right answer) for a fresh
//! untrained encoder, the trained checkpoint when present, and the remote
//! embedding service when configured. A sane untrained encoder lands near
//! the uniform mean rank on noise-like text; a trained one should crush it.

use elicit_core::eval::{render_table, save_report, single_positive_check, CHECK_RECALL_KS};
use elicit_core::retriever::{load_model, EncoderModel, TextEncoder};

use crate::backend::prepare_remote;
use crate::config::RunConfig;
use crate::error::CliError;

use super::{columns_for, ensure_output_dir, load_split_pairs};

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let pairs = load_split_pairs(config, config.eval.split)?;
    if pairs.is_empty() {
        return Err(CliError::Validation(format!(
            "no question-answer pairs in split {}",
            config.eval.split.name()
        )));
    }
    ensure_output_dir(config)?;
    let mut rows = Vec::new();

    let train = &config.train;
    let init = EncoderModel::init(train.buckets, train.dim, train.init_seed);
    let report = single_positive_check(&pairs, &init, CHECK_RECALL_KS)?;
    save_report(config.output_file("report_check_init.json"), &report)?;
    rows.push(("init".to_string(), report.metrics));

    let checkpoint = config.checkpoint_file();
    if checkpoint.exists() {
        let model = load_model(&checkpoint)?;
        let report = single_positive_check(&pairs, &model, CHECK_RECALL_KS)?;
        save_report(config.output_file("report_check_trained.json"), &report)?;
        rows.push(("trained".to_string(), report.metrics));
    } else {
        log::info!("no checkpoint at {}; skipping the trained row", checkpoint.display());
    }

    if let Some(section) = &config.embeddings {
        let remote = prepare_remote(section)?;
        let report = single_positive_check(&pairs, &remote, CHECK_RECALL_KS)?;
        save_report(config.output_file("report_check_remote.json"), &report)?;
        rows.push((remote.id(), report.metrics));
    }

    let n = pairs.len();
    println!(
        "{} single-positive queries; uniform guessing would average rank {:.1}",
        n,
        (n as f64 + 1.0) / 2.0
    );
    print!("{}", render_table(&rows, &columns_for(CHECK_RECALL_KS)));
    Ok(())
}
