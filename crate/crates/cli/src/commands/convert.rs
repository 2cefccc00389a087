//! convert: raw commentary in, question-answer splits plus the surviving
//! comment corpus and a provenance line per comment out.

use std::collections::BTreeMap;

use elicit_core::corpus::{
    load_commentary, load_descriptions, load_manifest, save_formatted_comments, save_qa_pairs,
    split_dataset,
};
use elicit_core::pipeline::{
    build_qa_dataset, save_records, save_transcript, ChatClient, RecordingClient,
};

use crate::backend::PreparedChat;
use crate::config::{RunConfig, Split};
use crate::error::CliError;

use super::{ensure_output_dir, write_json};

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let raw = load_commentary(&config.paths.commentary)?;
    let descriptions = load_descriptions(&config.paths.descriptions)?;
    let manifest = load_manifest(&config.paths.manifest)?;

    let chat_prep = PreparedChat::prepare(&config.chat)?;
    let checker_prep = match &config.checker {
        Some(section) => Some(PreparedChat::prepare(section)?),
        None => None,
    };

    let chat_recorder = chat_prep
        .record
        .as_ref()
        .map(|_| RecordingClient::new(chat_prep.client()));
    let chat_client: &dyn ChatClient = match &chat_recorder {
        Some(recorder) => recorder,
        None => chat_prep.client(),
    };
    let checker_recorder = checker_prep
        .as_ref()
        .and_then(|p| p.record.as_ref().map(|_| RecordingClient::new(p.client())));
    // No checker section means the main chat backend answers shallow checks
    // too, sharing its transcript and recorder.
    let checker_client: &dyn ChatClient = match (&checker_recorder, &checker_prep) {
        (Some(recorder), _) => recorder,
        (None, Some(prep)) => prep.client(),
        (None, None) => chat_client,
    };

    let result = build_qa_dataset(
        &raw,
        &descriptions,
        chat_client,
        checker_client,
        &config.pipeline.to_core(),
    );

    // Transcripts are written even when the run fails its quality gate:
    // recorded traffic stays replayable either way.
    if let (Some(recorder), Some(path)) = (chat_recorder, &chat_prep.record) {
        let entries = recorder.into_entries();
        save_transcript(path, &entries)?;
        log::info!("recorded {} chat exchanges to {}", entries.len(), path.display());
    }
    let checker_record = checker_prep.as_ref().and_then(|p| p.record.as_ref());
    if let (Some(recorder), Some(path)) = (checker_recorder, checker_record) {
        let entries = recorder.into_entries();
        save_transcript(path, &entries)?;
        log::info!("recorded {} checker exchanges to {}", entries.len(), path.display());
    }

    let outcome = result?;
    let splits = split_dataset(&outcome.pairs, &manifest)?;

    ensure_output_dir(config)?;
    save_qa_pairs(config.qa_file(Split::Train), &splits.train)?;
    save_qa_pairs(config.qa_file(Split::Seen), &splits.seen)?;
    save_qa_pairs(config.qa_file(Split::Val), &splits.val)?;
    save_formatted_comments(config.formatted_file(), &outcome.kept)?;
    write_json(&config.scenarios_file(), &outcome.scenario_by_video)?;
    save_records(config.provenance_file(), &outcome.records)?;

    let mut by_status: BTreeMap<String, usize> = BTreeMap::new();
    for record in &outcome.records {
        let key = serde_json::to_value(record.status)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_else(|| format!("{:?}", record.status));
        *by_status.entry(key).or_default() += 1;
    }
    println!(
        "{} raw comments -> {} kept, {} question-answer pairs",
        raw.len(),
        outcome.kept.len(),
        outcome.pairs.len()
    );
    for (status, count) in &by_status {
        println!("  {status}: {count}");
    }
    println!(
        "splits: train {}, seen {}, val {}",
        splits.train.len(),
        splits.seen.len(),
        splits.val.len()
    );
    println!("wrote {}", config.paths.output_dir.display());
    Ok(())
}
